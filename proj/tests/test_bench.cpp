#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "dopt/bench.hpp"
#include "dopt/dataset.hpp"
#include "dopt/error.hpp"
#include "dopt/random.hpp"
#include "oracles.hpp"

using namespace dopt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("dopt_test_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Errc code_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io_error;
}

RunConfig small_select(const std::string& algo) {
  RunConfig c;
  c.command = "select";
  c.algorithms = {algo};
  c.synthetic = SyntheticSpec{40, 5, 1.0, 1.0, 1.2};
  c.k = 8;
  c.repeats = 3;
  c.seed = 17;
  c.workers = 1;
  return c;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("csv example loads") {
    TempDir dir;
    write_text(dir.file("f.csv"), "id,f0,f1\n10,1.5,-2\n20,0.25,3e-1\n");
    write_text(dir.file("a.csv"), "id,label\n20,-1\n");
    write_text(dir.file("c.csv"), "i,j,label\n20,10,1\n");
    const Dataset ds = load_dataset(dir.file("f.csv"), dir.file("a.csv"), dir.file("c.csv"));
    CHECK(ds.features.samples() == 2);
    CHECK(ds.features.dim() == 2);
    CHECK(ds.ids == std::vector<std::int64_t>{10, 20});
    CHECK(ds.features.row(1)(1) == 0.3);
    REQUIRE(ds.labels.absolute.size() == 1);
    CHECK(ds.labels.absolute[0].sample == 1);
    CHECK(ds.labels.absolute[0].label == -1);
    REQUIRE(ds.labels.comparisons.size() == 1);
    // Stored canonically: (20 over 10) becomes (row 0, row 1) with the label flipped.
    CHECK(ds.labels.comparisons[0].pair == ComparisonId{0, 1});
    CHECK(ds.labels.comparisons[0].label == -1);
  }

  TEST_CASE("csv errors carry codes and line numbers") {
    TempDir dir;
    write_text(dir.file("f.csv"), "id,f0\n1,0.5\n2,1.0\n");
    write_text(dir.file("bad_label.csv"), "id,label\n1,1\n2,0\n");
    std::string msg;
    CHECK(code_of([&] { load_dataset(dir.file("f.csv"), dir.file("bad_label.csv")); }, &msg) ==
          Errc::invalid_label);
    CHECK(msg.find(":3:") != std::string::npos);

    write_text(dir.file("bad_num.csv"), "id,f0\n1,abc\n");
    CHECK(code_of([&] { load_dataset(dir.file("bad_num.csv")); }) == Errc::parse_error);
    write_text(dir.file("ragged.csv"), "id,f0,f1\n1,0.5\n");
    CHECK(code_of([&] { load_dataset(dir.file("ragged.csv")); }) == Errc::dimension_mismatch);
    write_text(dir.file("unknown.csv"), "i,j,label\n1,9,1\n");
    CHECK(code_of([&] { load_dataset(dir.file("f.csv"), {}, dir.file("unknown.csv")); }) ==
          Errc::index_out_of_range);
    CHECK(code_of([&] { load_dataset(dir.file("missing.csv")); }) == Errc::io_error);
  }

  TEST_CASE("property: csv round trip is exact") {
    TempDir dir;
    const SyntheticDataset syn = sample_synthetic({25, 4, 1.0, 1.0, 1.2}, 3);
    Dataset ds{syn.features(), {}, {}};
    for (std::int64_t i = 0; i < 25; ++i) ds.ids.push_back(100 + 3 * i);
    const std::vector<std::size_t> a{0, 4, 7};
    const std::vector<ComparisonId> s{{1, 2}, {3, 20}, {0, 24}};
    ds.labels = syn.reveal(a, s);
    write_dataset(ds, dir.file("f.csv"), dir.file("a.csv"), dir.file("c.csv"));
    const Dataset back = load_dataset(dir.file("f.csv"), dir.file("a.csv"), dir.file("c.csv"));
    CHECK(back.ids == ds.ids);
    CHECK(back.features.rows() == ds.features.rows());
    REQUIRE(back.labels.comparisons.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(back.labels.comparisons[t].pair == ds.labels.comparisons[t].pair);
      CHECK(back.labels.comparisons[t].label == ds.labels.comparisons[t].label);
      CHECK(back.labels.absolute[t].sample == ds.labels.absolute[t].sample);
    }
  }

  TEST_CASE("config validation") {
    RunConfig c = small_select("sg");
    c.validate();
    c.k = 0;
    CHECK(code_of([&] { c.validate(); }) == Errc::invalid_config);
    RunConfig d = small_select("nope");
    CHECK(code_of([&] { d.validate(); }) == Errc::invalid_config);
    RunConfig e = small_select("sg");
    e.synthetic.reset();
    CHECK(code_of([&] { e.validate(); }) == Errc::invalid_config);
  }

  TEST_CASE("config json round trip") {
    RunConfig c = small_select("flp");
    c.lambda_grid = {0.5, 2.0};
    const RunConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(code_of([] { config_from_json(nlohmann::json{{"k", "ten"}}); }) == Errc::invalid_config);
  }

  TEST_CASE("empty report writes a header-only csv") {
    TempDir dir;
    Report r;
    r.command = "select";
    emit_report(r, ReportFormat::csv, dir.file("r.csv"));
    const std::string text = read_text(dir.file("r.csv"));
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK(text.rfind("repeat,fold,seed,algorithm", 0) == 0);
  }

  TEST_CASE("report json round trip and stable emission") {
    const Report r = run_selection(small_select("flp"));
    CHECK(r.passed);
    REQUIRE(r.rows.size() == 3);
    const Report back = report_from_json(report_to_json(r));
    CHECK(dump_json(report_to_json(back)) == dump_json(report_to_json(r)));
    CHECK(report_hash(back) == report_hash(r));

    TempDir dir;
    emit_report(r, ReportFormat::json, dir.file("a.json"));
    emit_report(r, ReportFormat::json, dir.file("b.json"));
    CHECK(read_text(dir.file("a.json")) == read_text(dir.file("b.json")));
    const nlohmann::json j = nlohmann::json::parse(read_text(dir.file("a.json")));
    CHECK(j.at("schema_version") == Report::kSchemaVersion);
    CHECK(j.at("aggregates").contains("flp"));
  }

  TEST_CASE("hash ignores timings and runtime") {
    Report r = run_selection(small_select("sg"));
    const std::string h = report_hash(r);
    r.rows[0].timings.total += 1.0;
    r.rows[1].timings.find_max = 42.0;
    r.workers = 7;
    CHECK(report_hash(r) == h);
    r.rows[0].touches += 1;
    CHECK(report_hash(r) != h);
  }

  TEST_CASE("repeats are reproducible and independent of workers") {
    RunConfig c = small_select("slm");
    c.repeats = 6;
    const Report serial = run_selection(c);
    c.workers = 4;
    const Report parallel = run_selection(c);
    CHECK(report_hash(serial) == report_hash(parallel));
    CHECK(serial.rows[2].seed == derive_seed(17, 2));
    CHECK(serial.rows[0].selected != serial.rows[1].selected);
  }

  TEST_CASE("naive and swept greedy give identical reports") {
    RunConfig a = small_select("ng");
    RunConfig b = small_select("sg");
    const Report ra = run_selection(a);
    const Report rb = run_selection(b);
    REQUIRE(ra.rows.size() == rb.rows.size());
    for (std::size_t r = 0; r < ra.rows.size(); ++r) {
      CHECK(ra.rows[r].selected == rb.rows[r].selected);
      CHECK(*ra.rows[r].objective == doctest::Approx(*rb.rows[r].objective).epsilon(1e-9));
    }
  }

  TEST_CASE("baselines run through the selection path") {
    for (const char* tag : {"entropy", "fisher", "random"}) {
      const Report r = run_selection(small_select(tag));
      CHECK(r.passed);
      CHECK(r.rows[0].error.empty());
      CHECK(r.rows[0].selected.size() == 8);
    }
  }

  TEST_CASE("parallel_for runs every index and rethrows the lowest failure") {
    std::vector<int> hit(100, 0);
    parallel_for(100, 4, [&](std::size_t i) { hit[i] += 1; });
    CHECK(std::count(hit.begin(), hit.end(), 1) == 100);
    try {
      parallel_for(10, 3, [](std::size_t i) {
        if (i == 3 || i == 7) throw Error(Errc::invalid_config, "boom " + std::to_string(i));
      });
      FAIL("expected rethrow");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("boom 3") != std::string::npos);
    }
  }

  TEST_CASE("full budget makes selection irrelevant") {
    RunConfig c;
    c.command = "evaluate";
    c.algorithms = {"sg", "random"};
    c.synthetic = SyntheticSpec{24, 3, 1.0, 1.0, 1.2};
    c.full_budget = true;
    c.folds = 2;
    c.repeats = 2;
    c.seed = 5;
    c.workers = 1;
    const Report r = run_evaluation(c);
    REQUIRE(r.rows.size() == 8);
    for (std::size_t t = 0; t < r.rows.size(); t += 2) {
      REQUIRE(r.rows[t].algorithm == "sg");
      REQUIRE(r.rows[t + 1].algorithm == "random");
      CHECK(r.rows[t].auc_comparison == r.rows[t + 1].auc_comparison);
      CHECK(r.rows[t].auc_absolute == r.rows[t + 1].auc_absolute);
    }
  }

  TEST_CASE("fit with zero comparisons equals the absolute-only fit") {
    const SyntheticDataset syn = sample_synthetic({30, 4, 1.0, 1.0, 1.2}, 8);
    const std::vector<std::size_t> a{0, 3, 6, 9, 12};
    const LabeledData abs_only = syn.reveal(a, {});
    LabeledData empty_cmp = abs_only;
    empty_cmp.comparisons.clear();
    CHECK(map_fit(syn.features(), abs_only, 0.1).params.beta ==
          map_fit(syn.features(), empty_cmp, 0.1).params.beta);
  }

  TEST_CASE("verify reports a fault injected into one variant") {
    RunConfig c;
    c.command = "verify";
    c.instances = 4;
    c.verify_n = {30};
    c.verify_d = {5};
    c.k = 6;
    c.workers = 1;
    const Report clean = verify_equivalence(c);
    CHECK(clean.passed);
    c.inject_fault = "flm";
    const Report bad = verify_equivalence(c);
    CHECK_FALSE(bad.passed);
    CHECK(bad.summary.find("flm") != std::string::npos);
    REQUIRE_FALSE(bad.verify.empty());
    c.instance_seed = bad.verify[0].seed;
    const Report replay = verify_equivalence(c);
    REQUIRE(replay.verify.size() == 1);
    CHECK(replay.verify[0].selected.at("flm") == bad.verify[0].selected.at("flm"));
  }
}
