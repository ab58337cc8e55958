#include <doctest.h>

#include "urfc/features.hpp"

#include <filesystem>

using namespace urfc;

namespace {
VisitLog make_log(const std::string& id,
                  std::map<std::string, std::vector<VisitEvent>> visits) {
  VisitLog log;
  log.region_id = id;
  log.visits = std::move(visits);
  return log;
}
}  // namespace

TEST_CASE("statistical feature of an empty log is the zero vector") {
  const auto f = extract_statistical(make_log("r", {}));
  REQUIRE(f.size() == kStatDim);
  for (double v : f) CHECK(v == 0.0);
}

TEST_CASE("statistical feature, one user with events (0,9),(0,10)") {
  const auto f = extract_statistical(make_log("r", {{"u", {{0, 9}, {0, 10}}}}));
  CHECK(f[0] == 2.0);   // total events
  CHECK(f[1] == 1.0);   // users
  CHECK(f[2] == 1.0);   // active days
  CHECK(f[3] == 2.0);   // mean events/user
  CHECK(f[4] == 0.0);   // std events/user
  CHECK(f[5] == 2.0);   // max
  CHECK(f[6] == 2.0);   // min
  CHECK(f[7] == doctest::Approx(9.5));
  CHECK(f[8] == doctest::Approx(0.5));
  CHECK(f[9] == 9.0);
  CHECK(f[10] == 10.0);
  CHECK(f[11 + 9] == doctest::Approx(0.5));
  CHECK(f[11 + 10] == doctest::Approx(0.5));
  CHECK(f[11 + 0] == 0.0);
  CHECK(f[35 + 0] == doctest::Approx(1.0));  // day 0 is weekday 0
  CHECK(f[42] == 0.0);                       // weekend
  CHECK(f[43] == doctest::Approx(1.0));      // work hours
  CHECK(f[44] == 0.0);                       // night
}

TEST_CASE("two users with identical event sets double the count dims only") {
  const std::vector<VisitEvent> events = {{0, 9}, {0, 10}};
  const auto one = extract_statistical(make_log("r", {{"u1", events}}));
  const auto two = extract_statistical(make_log("r", {{"u1", events}, {"u2", events}}));
  CHECK(two[0] == 2 * one[0]);
  CHECK(two[1] == 2 * one[1]);
  for (int i = 7; i < kStatDim; ++i) CHECK(two[i] == doctest::Approx(one[i]));
}

TEST_CASE("statistical histogram invariants") {
  const auto f = extract_statistical(
      make_log("r", {{"u1", {{5, 3}, {6, 23}, {12, 9}}}, {"u2", {{0, 0}}}}));
  double hour_sum = 0, day_sum = 0;
  for (int h = 0; h < 24; ++h) hour_sum += f[11 + h];
  for (int k = 0; k < 7; ++k) day_sum += f[35 + k];
  CHECK(hour_sum == doctest::Approx(1.0));
  CHECK(day_sum == doctest::Approx(1.0));
  CHECK(f[6] <= f[3]);
  CHECK(f[3] <= f[5]);
}

TEST_CASE("user index construction") {
  const auto r1 = make_log("r1", {{"u", {{0, 8}, {0, 9}, {1, 8}, {1, 9}}}});
  const auto r2 = make_log("r2", {{"u", {{5, 12}}}, {"v", {{6, 13}}}});
  const auto r3 = make_log("r3", {{"u", {{12, 20}}}});
  const auto index = build_user_index({{&r1, 0}, {&r2, 0}, {&r3, 1}});

  REQUIRE(index.users.count("u"));
  CHECK(index.users.at("u").size() == 3);
  CHECK(index.users.at("v").size() == 1);
  CHECK(index.region_labels.at("r3") == 1);
  // region lists sorted by id
  CHECK(index.users.at("u")[0].region_id == "r1");
  CHECK(index.users.at("u")[2].region_id == "r3");
}

TEST_CASE("activity profile") {
  SUBCASE("unknown user is all-zero") {
    const UserIndex empty;
    const auto p = user_activity_profile("ghost", empty);
    CHECK(p == std::vector<double>(kActivityDim, 0.0));
  }
  SUBCASE("one Res region, 4 events, 2 days, hours 8,9,8,9, no weekend") {
    const auto r1 = make_log("r1", {{"u", {{0, 8}, {0, 9}, {1, 8}, {1, 9}}}});
    const auto index = build_user_index({{&r1, 0}});
    const auto p = user_activity_profile("u", index);
    CHECK(p[0] == 1.0);  // regions
    CHECK(p[1] == 4.0);  // events
    CHECK(p[2] == 2.0);  // days
    CHECK(p[3] == doctest::Approx(8.5));
    CHECK(p[4] == 0.0);  // weekend ratio
    for (int i = kActivityCols; i < kActivityDim; ++i) CHECK(p[i] == 0.0);
  }
  SUBCASE("excluding the user's only region empties the profile") {
    const auto r1 = make_log("r1", {{"u", {{0, 8}}}});
    const auto index = build_user_index({{&r1, 0}});
    const auto p = user_activity_profile("u", index, std::string("r1"));
    CHECK(p == std::vector<double>(kActivityDim, 0.0));
  }
}

TEST_CASE("f_A aggregation") {
  const auto r1 = make_log("r1", {{"u", {{0, 8}, {1, 9}}}});
  const auto r2 = make_log("r2", {{"v", {{5, 12}, {6, 13}}}});
  const auto index = build_user_index({{&r1, 0}, {&r2, 3}});

  SUBCASE("single user: f_A = flatten(A(u))") {
    const auto target = make_log("t", {{"u", {{9, 9}}}});
    CHECK(extract_user_activity(target, index, "t") ==
          user_activity_profile("u", index, std::string("t")));
  }
  SUBCASE("two users: element-wise mean of profiles") {
    const auto target = make_log("t", {{"u", {{9, 9}}}, {"v", {{9, 10}}}});
    const auto f = extract_user_activity(target, index, "t");
    const auto pu = user_activity_profile("u", index, std::string("t"));
    const auto pv = user_activity_profile("v", index, std::string("t"));
    for (int i = 0; i < kActivityDim; ++i) {
      CHECK(f[i] == doctest::Approx((pu[i] + pv[i]) / 2.0));
    }
  }
  SUBCASE("all users unknown gives zero vector") {
    const auto target = make_log("t", {{"x", {{9, 9}}}, {"y", {{9, 10}}}});
    CHECK(extract_user_activity(target, index, "t") == std::vector<double>(kActivityDim, 0.0));
  }
  SUBCASE("empty log gives zero vector") {
    CHECK(extract_user_activity(make_log("t", {}), index, "t") ==
          std::vector<double>(kActivityDim, 0.0));
  }
  SUBCASE("unknown users dilute the mean (denominator is |U_i|)") {
    const auto known = make_log("t", {{"u", {{9, 9}}}});
    const auto mixed = make_log("t", {{"u", {{9, 9}}}, {"x", {{9, 10}}}});
    const auto f1 = extract_user_activity(known, index, "t");
    const auto f2 = extract_user_activity(mixed, index, "t");
    for (int i = 0; i < kActivityDim; ++i) CHECK(f2[i] == doctest::Approx(f1[i] / 2.0));
  }
}

TEST_CASE("f_A is invariant under duplicating every user") {
  // Two regions visited by both users, so duplicates have identical profiles.
  const auto r1 = make_log("r1", {{"u", {{0, 8}}}, {"u2", {{0, 8}}}});
  const auto index = build_user_index({{&r1, 2}});
  const auto single = make_log("t", {{"u", {{9, 9}}}});
  const auto doubled = make_log("t", {{"u", {{9, 9}}}, {"u2", {{9, 9}}}});
  const auto f1 = extract_user_activity(single, index, "t");
  const auto f2 = extract_user_activity(doubled, index, "t");
  for (int i = 0; i < kActivityDim; ++i) CHECK(f2[i] == doctest::Approx(f1[i]));
}

TEST_CASE("f_G region graph feature") {
  const auto r1 = make_log("r1", {{"u", {{0, 8}}}});
  const auto r2 = make_log("r2", {{"u", {{1, 9}}}});
  const auto r3 = make_log("r3", {{"u", {{2, 10}, {3, 11}}}});
  const auto index = build_user_index({{&r1, 0}, {&r2, 0}, {&r3, 1}});
  StatStore store;
  store["r1"] = extract_statistical(r1);
  store["r2"] = extract_statistical(r2);
  store["r3"] = extract_statistical(r3);

  SUBCASE("per-category means; rows without related regions are zero") {
    const auto target = make_log("t", {{"u", {{9, 9}}}});
    const auto f = extract_region_graph(target, index, store, "t");
    REQUIRE(f.size() == kGraphDim);
    for (int i = 0; i < kStatDim; ++i) {
      CHECK(f[i] == doctest::Approx((store["r1"][i] + store["r2"][i]) / 2.0));  // Res row
      CHECK(f[kStatDim + i] == doctest::Approx(store["r3"][i]));                // Sch row
    }
    for (int c = 2; c < kNumCategories; ++c) {
      for (int i = 0; i < kStatDim; ++i) CHECK(f[c * kStatDim + i] == 0.0);
    }
  }
  SUBCASE("self region excluded from the related set") {
    const auto f = extract_region_graph(r1, index, store, "r1");
    for (int i = 0; i < kStatDim; ++i) CHECK(f[i] == doctest::Approx(store["r2"][i]));
  }
  SUBCASE("empty related set gives zero vector") {
    const auto target = make_log("t", {{"ghost", {{9, 9}}}});
    CHECK(extract_region_graph(target, index, store, "t") ==
          std::vector<double>(kGraphDim, 0.0));
  }
  SUBCASE("stat store miss names the region") {
    StatStore partial = store;
    partial.erase("r2");
    const auto target = make_log("t", {{"u", {{9, 9}}}});
    CHECK_THROWS_WITH_AS(extract_region_graph(target, index, partial, "t"),
                         doctest::Contains("r2"), std::runtime_error);
  }
  SUBCASE("nonzero row count equals distinct related categories") {
    const auto target = make_log("t", {{"u", {{9, 9}}}});
    const auto f = extract_region_graph(target, index, store, "t");
    int nonzero_rows = 0;
    for (int c = 0; c < kNumCategories; ++c) {
      bool any = false;
      for (int i = 0; i < kStatDim; ++i) any |= f[c * kStatDim + i] != 0.0;
      nonzero_rows += any;
    }
    CHECK(nonzero_rows == 2);
  }
}

TEST_CASE("concat_multidim ordering and dimension checks") {
  std::vector<double> f_s(kStatDim, 0.0), f_a(kActivityDim, 0.0), f_g(kGraphDim, 0.0);
  f_s[0] = 1.0;
  const auto out = concat_multidim(f_s, f_a, f_g);
  REQUIRE(out.size() == kMultiDim);
  CHECK(out[0] == 1.0);
  for (int i = 1; i < kMultiDim; ++i) CHECK(out[i] == 0.0);

  f_a[0] = 2.0;
  const auto out2 = concat_multidim(f_s, f_a, f_g);
  CHECK(out2[kStatDim] == 2.0);  // blocks are positional

  CHECK_THROWS_AS(concat_multidim(f_g, f_a, f_s), std::invalid_argument);
}

TEST_CASE("feature matrix binary round trip") {
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "urfc_feat_test.bin";
  const std::vector<std::string> ids = {"a", "b"};
  const std::vector<std::vector<double>> rows = {{1.5, -2.25, 1e-17}, {0.0, 3.0, 4.0}};
  write_features_binary(path, ids, rows);
  const auto [rids, rrows] = read_features_binary(path);
  CHECK(rids == ids);
  CHECK(rrows == rows);
  fs::remove(path);
}
