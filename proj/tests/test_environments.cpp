#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

#include "pfmtl/environments.hpp"
#include "test_util.hpp"

using namespace pfmtl;
using testutil::contains;
using testutil::message_of;

namespace {

struct TempCsv {
  std::filesystem::path path;
  TempCsv(const std::string& name, const std::string& body)
      : path(std::filesystem::temp_directory_path() / name) {
    std::ofstream out(path);
    out << body;
  }
  ~TempCsv() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  std::string str() const { return path.string(); }
};

bool same_point(const DataPoint& a, const DataPoint& b) {
  return a.x == b.x && a.y == b.y;
}

bool same_env(const Environment& a, const Environment& b) {
  if (a.dim != b.dim || a.input_bound != b.input_bound || a.train_size != b.train_size) return false;
  if (a.tasks.size() != b.tasks.size()) return false;
  for (std::size_t t = 0; t < a.tasks.size(); ++t) {
    const Task& ta = a.tasks[t];
    const Task& tb = b.tasks[t];
    if (ta.id != tb.id || ta.target != tb.target) return false;
    if (ta.train.size() != tb.train.size() || ta.test.size() != tb.test.size()) return false;
    for (std::size_t i = 0; i < ta.train.size(); ++i) {
      if (!same_point(ta.train[i], tb.train[i])) return false;
    }
    for (std::size_t i = 0; i < ta.test.size(); ++i) {
      if (!same_point(ta.test[i], tb.test[i])) return false;
    }
  }
  return true;
}

Environment numbered_env(const std::vector<std::size_t>& train_sizes, std::size_t test_size) {
  Environment env;
  env.dim = 1;
  env.input_bound = 1.0;
  for (std::size_t t = 0; t < train_sizes.size(); ++t) {
    Task task;
    task.id = "t" + std::to_string(t);
    for (std::size_t i = 0; i < train_sizes[t]; ++i) {
      task.train.push_back({Vec{0.5}, static_cast<double>(t * 1000 + i)});
    }
    for (std::size_t i = 0; i < test_size; ++i) {
      task.test.push_back({Vec{0.5}, static_cast<double>(t * 1000 + 500 + i)});
    }
    env.tasks.push_back(std::move(task));
  }
  env.train_size = train_sizes.empty() ? 0 : train_sizes.front();
  for (std::size_t n : train_sizes) {
    if (n != env.train_size) env.train_size = 0;
  }
  return env;
}

}  // namespace

TEST_CASE("synthetic generation is reproducible from the seed") {
  const Vec theta{1.0, -2.0, 0.5};
  const Environment a = gen_synthetic(42, 6, 10, 3, theta, 0.7, 0.5);
  const Environment b = gen_synthetic(42, 6, 10, 3, theta, 0.7, 0.5);
  CHECK(same_env(a, b));

  const Environment c = gen_synthetic(43, 6, 10, 3, theta, 0.7, 0.5);
  CHECK(a.tasks[0].train[0].y != c.tasks[0].train[0].y);
}

TEST_CASE("synthetic inputs lie on the unit sphere") {
  const Environment env = gen_synthetic(7, 4, 30, 8, zeros(8), 1.0, 0.5);
  CHECK(env.input_bound == 1.0);
  for (const Task& task : env.tasks) {
    for (const DataPoint& p : task.train) CHECK(std::abs(norm(p.x) - 1.0) <= 1e-12);
    for (const DataPoint& p : task.test) CHECK(std::abs(norm(p.x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("synthetic sizes follow the test fraction") {
  const Environment half = gen_synthetic(1, 3, 25, 2, zeros(2), 0.1, 0.5);
  CHECK(half.train_size == 25);
  for (const Task& task : half.tasks) {
    CHECK(task.train.size() == 25);
    CHECK(task.test.size() == 25);
  }

  const Environment fifth = gen_synthetic(1, 3, 10, 2, zeros(2), 0.1, 0.2);
  for (const Task& task : fifth.tasks) CHECK(task.test.size() == 3);

  const Environment third = gen_synthetic(1, 3, 10, 2, zeros(2), 0.1, 1.0 / 3.0);
  for (const Task& task : third.tasks) CHECK(task.test.size() == 5);

  const Environment none = gen_synthetic(1, 3, 10, 2, zeros(2), 0.1, 0.0);
  for (const Task& task : none.tasks) CHECK(task.test.empty());
}

TEST_CASE("synthetic tasks with zero spread share the center exactly") {
  const Vec theta{2.0, -1.0};
  const Environment env = gen_synthetic(11, 5, 8, 2, theta, 0.0, 0.0);
  for (const Task& task : env.tasks) {
    REQUIRE(task.target.has_value());
    CHECK(*task.target == theta);
  }

  const Environment silent = gen_synthetic(11, 2, 8, 2, zeros(2), 0.0, 0.0);
  for (const Task& task : silent.tasks) {
    for (const DataPoint& p : task.train) CHECK(p.y == 0.0);
  }
}

TEST_CASE("synthetic labels are the target response plus calibrated noise") {
  const Vec theta{1.0, -2.0, 0.5, 0.0, 3.0, -1.0};
  const Environment env = gen_synthetic(7, 1, 5000, 6, theta, 0.5, 0.0);
  const Task& task = env.tasks.front();
  REQUIRE(task.target.has_value());
  const double noise_std = norm(*task.target) / std::sqrt(6.0);

  double sq = 0.0;
  for (const DataPoint& p : task.train) {
    const double r = p.y - dot(p.x, *task.target);
    sq += r * r;
  }
  const double sample_std = std::sqrt(sq / static_cast<double>(task.train.size()));
  CHECK(sample_std == doctest::Approx(noise_std).epsilon(0.1));
}

TEST_CASE("synthetic inputs are spread evenly over the sphere") {
  const Environment env = gen_synthetic(19, 1, 5000, 10, zeros(10), 0.0, 0.0);
  double mean = 0.0;
  double mean_sq = 0.0;
  for (const DataPoint& p : env.tasks.front().train) {
    mean += p.x[0];
    mean_sq += p.x[0] * p.x[0];
  }
  mean /= 5000.0;
  mean_sq /= 5000.0;
  CHECK(std::abs(mean) < 0.05);
  CHECK(mean_sq == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("synthetic provenance records the generator arguments") {
  const Vec theta{1.0, 0.0};
  const Environment env = gen_synthetic(5, 3, 4, 2, theta, 0.25, 0.5);
  CHECK(env.provenance["type"] == "synthetic");
  CHECK(env.provenance["seed"] == 5);
  CHECK(env.provenance["task_count"] == 3);
  CHECK(env.provenance["train_size"] == 4);
  CHECK(env.provenance["dim"] == 2);
  CHECK(env.provenance["theta_star"] == nlohmann::json(theta));
  CHECK(env.provenance["task_std"] == 0.25);
  CHECK(env.provenance["test_fraction"] == 0.5);
}

TEST_CASE("synthetic generation rejects bad arguments") {
  CHECK_THROWS_AS(gen_synthetic(1, 0, 4, 2, zeros(2), 0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 0, 2, zeros(2), 0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 4, 0, zeros(0), 0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 4, 2, zeros(3), 0.1, 0.0), DimensionMismatch);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 4, 2, zeros(2), -0.1, 0.0), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 4, 2, zeros(2), 0.1, 1.0), InvalidParameter);
  CHECK_THROWS_AS(gen_synthetic(1, 3, 4, 2, zeros(2), 0.1, -0.5), InvalidParameter);
}

TEST_CASE("csv loading groups rows into tasks by first appearance") {
  const TempCsv file("pfmtl_csv_happy.csv",
                     "task,a,b,y\n"
                     "t1,0.5,0.0,1.0\n"
                     "t2,0.0,0.5,2.0\n"
                     "\n"
                     "t1,0.25,0.25,0.5\n");
  const CsvSchema schema{"task", {"a", "b"}, "y"};
  const Environment env = load_csv(file.str(), schema);

  REQUIRE(env.tasks.size() == 2);
  CHECK(env.tasks[0].id == "t1");
  CHECK(env.tasks[1].id == "t2");
  CHECK(env.dim == 2);
  CHECK(env.train_size == 0);

  REQUIRE(env.tasks[0].train.size() == 2);
  CHECK(env.tasks[0].train[0].x == Vec{0.5, 0.0});
  CHECK(env.tasks[0].train[0].y == 1.0);
  CHECK(env.tasks[0].train[1].x == Vec{0.25, 0.25});
  CHECK(env.tasks[0].train[1].y == 0.5);
  REQUIRE(env.tasks[1].train.size() == 1);
  CHECK(env.tasks[1].train[0].x == Vec{0.0, 0.5});
  CHECK(env.tasks[1].test.empty());
  CHECK(!env.tasks[0].target.has_value());

  CHECK(env.input_bound == 0.5);
  CHECK(env.provenance["type"] == "csv");
  CHECK(env.provenance["input_bound_declared"] == false);
}

TEST_CASE("csv columns are matched by name, not position") {
  const TempCsv plain("pfmtl_csv_order_a.csv",
                      "task,a,b,y\n"
                      "t1,0.5,0.25,1.0\n");
  const TempCsv shuffled("pfmtl_csv_order_b.csv",
                         "y,b,task,a,extra\n"
                         "1.0,0.25,t1,0.5,99\n");
  const CsvSchema schema{"task", {"a", "b"}, "y"};
  const Environment a = load_csv(plain.str(), schema);
  const Environment b = load_csv(shuffled.str(), schema);
  CHECK(a.tasks[0].train[0].x == b.tasks[0].train[0].x);
  CHECK(a.tasks[0].train[0].y == b.tasks[0].train[0].y);
}

TEST_CASE("csv loading handles crlf line endings") {
  const TempCsv file("pfmtl_csv_crlf.csv", "task,a,y\r\nt1,0.5,1.0\r\n");
  const Environment env = load_csv(file.str(), CsvSchema{"task", {"a"}, "y"});
  CHECK(env.tasks[0].train[0].x == Vec{0.5});
  CHECK(env.tasks[0].train[0].y == 1.0);
}

TEST_CASE("csv declared bound is enforced with slack") {
  const CsvSchema schema{"task", {"a", "b"}, "y"};
  const TempCsv file("pfmtl_csv_bound.csv",
                     "task,a,b,y\n"
                     "t1,0.3,0.4,1.0\n"
                     "t1,0.5,0.0,2.0\n");

  const Environment ok = load_csv(file.str(), schema, 0.5);
  CHECK(ok.input_bound == 0.5);
  CHECK(ok.provenance["input_bound_declared"] == true);

  const std::string msg =
      message_of<InputBoundViolation>([&] { load_csv(file.str(), schema, 0.4); });
  CHECK(contains(msg, "row 2"));
  CHECK(contains(msg, "0.4"));
}

TEST_CASE("csv parse errors carry the offending row and column") {
  const CsvSchema schema{"task", {"a", "b"}, "y"};

  const TempCsv arity("pfmtl_csv_arity.csv",
                      "task,a,b,y\n"
                      "t1,0.1,0.2,1.0\n"
                      "t1,0.1,0.2,1.0,9\n");
  const std::string arity_msg = message_of<ParseError>([&] { load_csv(arity.str(), schema); });
  CHECK(contains(arity_msg, "row 3"));
  CHECK(contains(arity_msg, "expected 4 fields, got 5"));

  const TempCsv feature("pfmtl_csv_feature.csv",
                        "task,a,b,y\n"
                        "t1,abc,0.2,1.0\n");
  const std::string feature_msg = message_of<ParseError>([&] { load_csv(feature.str(), schema); });
  CHECK(contains(feature_msg, "row 2"));
  CHECK(contains(feature_msg, "column \"a\""));
  CHECK(contains(feature_msg, "\"abc\""));

  const TempCsv label("pfmtl_csv_label.csv",
                      "task,a,b,y\n"
                      "t1,0.1,0.2,1.0\n"
                      "\n"
                      "t1,0.1,0.2,1.5x\n");
  const std::string label_msg = message_of<ParseError>([&] { load_csv(label.str(), schema); });
  CHECK(contains(label_msg, "row 4"));
  CHECK(contains(label_msg, "column \"y\""));

  const TempCsv header("pfmtl_csv_header.csv",
                       "task,a,y\n"
                       "t1,0.1,1.0\n");
  const std::string header_msg = message_of<ParseError>([&] { load_csv(header.str(), schema); });
  CHECK(contains(header_msg, "row 1"));
  CHECK(contains(header_msg, "column \"b\" not found"));

  const TempCsv anon("pfmtl_csv_anon.csv",
                     "task,a,b,y\n"
                     ",0.1,0.2,1.0\n");
  const std::string anon_msg = message_of<ParseError>([&] { load_csv(anon.str(), schema); });
  CHECK(contains(anon_msg, "row 2"));
  CHECK(contains(anon_msg, "empty task id"));

  const TempCsv empty("pfmtl_csv_empty.csv", "");
  CHECK(contains(message_of<ParseError>([&] { load_csv(empty.str(), schema); }), "empty file"));

  const TempCsv bare("pfmtl_csv_bare.csv", "task,a,b,y\n");
  CHECK(contains(message_of<ParseError>([&] { load_csv(bare.str(), schema); }), "no data rows"));

  const TempCsv silent("pfmtl_csv_silent.csv",
                       "task,a,b,y\n"
                       "t1,0,0,1.0\n");
  CHECK(contains(message_of<ParseError>([&] { load_csv(silent.str(), schema); }),
                 "cannot measure"));

  CHECK_THROWS_AS(load_csv("/nonexistent/no_such.csv", schema), ParseError);
  const TempCsv fine("pfmtl_csv_fine.csv", "task,a,b,y\nt1,0.1,0.2,1.0\n");
  CHECK_THROWS_AS(load_csv(fine.str(), CsvSchema{"task", {}, "y"}), InvalidParameter);
}

TEST_CASE("splitting pools each task and cuts at the training fraction") {
  const Environment env = numbered_env({10, 10}, 2);
  const Environment out = split_train_test(env, 0.75, 3);
  for (const Task& task : out.tasks) {
    CHECK(task.train.size() == 9);
    CHECK(task.test.size() == 3);
  }
  CHECK(out.train_size == 9);
  CHECK(out.provenance["split"]["train_fraction"] == 0.75);
  CHECK(out.provenance["split"]["seed"] == 3);

  for (std::size_t t = 0; t < env.tasks.size(); ++t) {
    std::vector<double> before;
    for (const DataPoint& p : env.tasks[t].train) before.push_back(p.y);
    for (const DataPoint& p : env.tasks[t].test) before.push_back(p.y);
    std::vector<double> after;
    for (const DataPoint& p : out.tasks[t].train) after.push_back(p.y);
    for (const DataPoint& p : out.tasks[t].test) after.push_back(p.y);
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
  }
}

TEST_CASE("splitting with fraction one keeps the pool order and no test side") {
  const Environment env = numbered_env({4}, 2);
  const Environment out = split_train_test(env, 1.0, 9);
  REQUIRE(out.tasks[0].train.size() == 6);
  CHECK(out.tasks[0].test.empty());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(same_point(out.tasks[0].train[i], env.tasks[0].train[i]));
  }
  CHECK(same_point(out.tasks[0].train[4], env.tasks[0].test[0]));
  CHECK(same_point(out.tasks[0].train[5], env.tasks[0].test[1]));
}

TEST_CASE("splitting keeps at least one training point") {
  const Environment env = numbered_env({3}, 0);
  const Environment out = split_train_test(env, 0.1, 1);
  CHECK(out.tasks[0].train.size() == 1);
  CHECK(out.tasks[0].test.size() == 2);
}

TEST_CASE("splitting is reproducible from the seed") {
  const Environment env = numbered_env({12, 12, 12}, 3);
  const Environment a = split_train_test(env, 0.8, 17);
  const Environment b = split_train_test(env, 0.8, 17);
  CHECK(same_env(a, b));

  const Environment c = split_train_test(env, 0.8, 18);
  bool any_differ = false;
  for (std::size_t t = 0; t < a.tasks.size() && !any_differ; ++t) {
    for (std::size_t i = 0; i < a.tasks[t].train.size(); ++i) {
      if (a.tasks[t].train[i].y != c.tasks[t].train[i].y) {
        any_differ = true;
        break;
      }
    }
  }
  CHECK(any_differ);
}

TEST_CASE("splitting rejects bad fractions and empty tasks") {
  const Environment env = numbered_env({4}, 0);
  CHECK_THROWS_AS(split_train_test(env, 0.0, 1), InvalidParameter);
  CHECK_THROWS_AS(split_train_test(env, 1.5, 1), InvalidParameter);
  CHECK_THROWS_AS(split_train_test(env, -0.5, 1), InvalidParameter);

  Environment hollow = numbered_env({4}, 0);
  hollow.tasks.push_back(Task{"void", {}, {}, std::nullopt});
  CHECK_THROWS_AS(split_train_test(hollow, 0.5, 1), InvalidParameter);
}

TEST_CASE("truncation to a prefix keeps the first points and drops short tasks") {
  const Environment env = numbered_env({6, 3, 5}, 1);
  const Environment out = truncate_tasks(env, 5, TruncatePolicy::DropShort);
  REQUIRE(out.tasks.size() == 2);
  CHECK(out.tasks[0].id == "t0");
  CHECK(out.tasks[1].id == "t2");
  CHECK(out.train_size == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(same_point(out.tasks[0].train[i], env.tasks[0].train[i]));
    CHECK(same_point(out.tasks[1].train[i], env.tasks[2].train[i]));
  }
  CHECK(out.tasks[0].test.size() == 1);
  CHECK(out.provenance["truncation"]["policy"] == "drop_short");
  CHECK(out.provenance["truncation"]["dropped_tasks"] == 1);
  CHECK(out.provenance["truncation"]["common_size"] == 5);
}

TEST_CASE("truncation by subsampling picks an in-order subset") {
  const Environment env = numbered_env({20}, 0);
  const Environment a = truncate_tasks(env, 8, TruncatePolicy::Subsample, 5);
  const Environment b = truncate_tasks(env, 8, TruncatePolicy::Subsample, 5);
  CHECK(same_env(a, b));

  REQUIRE(a.tasks[0].train.size() == 8);
  double prev = -1.0;
  for (const DataPoint& p : a.tasks[0].train) {
    CHECK(p.y > prev);
    prev = p.y;
    bool found = false;
    for (const DataPoint& q : env.tasks[0].train) {
      if (same_point(p, q)) found = true;
    }
    CHECK(found);
  }

  const Environment c = truncate_tasks(env, 8, TruncatePolicy::Subsample, 6);
  bool differs = false;
  for (std::size_t i = 0; i < 8; ++i) {
    if (a.tasks[0].train[i].y != c.tasks[0].train[i].y) differs = true;
  }
  CHECK(differs);
  CHECK(a.provenance["truncation"]["policy"] == "subsample");
}

TEST_CASE("truncation rejects impossible sizes") {
  const Environment env = numbered_env({4, 4}, 0);
  CHECK_THROWS_AS(truncate_tasks(env, 0, TruncatePolicy::DropShort), InvalidParameter);
  CHECK_THROWS_AS(truncate_tasks(env, 5, TruncatePolicy::DropShort), InvalidParameter);
}
