#include "dopt/dopt.h"

#include <cstring>
#include <new>
#include <string>

#include "dopt/bench.hpp"
#include "dopt/dataset.hpp"
#include "dopt/error.hpp"
#include "dopt/selection.hpp"

struct dopt_dataset {
  dopt::FeatureMatrix features;
};

struct dopt_report {
  dopt::Report report;
  std::string hash;
  std::string json;
};

namespace {

thread_local std::string g_last_error;

dopt_status to_status(dopt::Errc code) {
  using dopt::Errc;
  switch (code) {
    case Errc::not_positive_definite: return DOPT_NOT_POSITIVE_DEFINITE;
    case Errc::degenerate_update: return DOPT_DEGENERATE_UPDATE;
    case Errc::index_out_of_range: return DOPT_INDEX_OUT_OF_RANGE;
    case Errc::already_selected: return DOPT_ALREADY_SELECTED;
    case Errc::instance_too_large: return DOPT_INSTANCE_TOO_LARGE;
    case Errc::empty_heap: return DOPT_EMPTY_HEAP;
    case Errc::stale_stamp_corruption: return DOPT_STALE_STAMP_CORRUPTION;
    case Errc::degenerate_label_set: return DOPT_DEGENERATE_LABEL_SET;
    case Errc::parse_error: return DOPT_PARSE_ERROR;
    case Errc::dimension_mismatch: return DOPT_DIMENSION_MISMATCH;
    case Errc::invalid_label: return DOPT_INVALID_LABEL;
    case Errc::io_error: return DOPT_IO_ERROR;
    case Errc::invalid_config: return DOPT_INVALID_CONFIG;
  }
  return DOPT_INTERNAL_ERROR;
}

dopt_status fail(dopt_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs `body`, translating exceptions into status codes.
template <class F>
dopt_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DOPT_OK;
  } catch (const dopt::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DOPT_INVALID_CONFIG, std::string("InvalidConfig: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(DOPT_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(DOPT_INTERNAL_ERROR, e.what());
  }
}

}  // namespace

extern "C" {

const char* dopt_last_error(void) { return g_last_error.c_str(); }

const char* dopt_status_name(dopt_status status) {
  switch (status) {
    case DOPT_OK: return "Ok";
    case DOPT_NOT_POSITIVE_DEFINITE: return "NotPositiveDefinite";
    case DOPT_DEGENERATE_UPDATE: return "DegenerateUpdate";
    case DOPT_INDEX_OUT_OF_RANGE: return "IndexOutOfRange";
    case DOPT_ALREADY_SELECTED: return "AlreadySelected";
    case DOPT_INSTANCE_TOO_LARGE: return "InstanceTooLarge";
    case DOPT_EMPTY_HEAP: return "EmptyHeap";
    case DOPT_STALE_STAMP_CORRUPTION: return "StaleStampCorruption";
    case DOPT_DEGENERATE_LABEL_SET: return "DegenerateLabelSet";
    case DOPT_PARSE_ERROR: return "ParseError";
    case DOPT_DIMENSION_MISMATCH: return "DimensionMismatch";
    case DOPT_INVALID_LABEL: return "InvalidLabel";
    case DOPT_IO_ERROR: return "IoError";
    case DOPT_INVALID_CONFIG: return "InvalidConfig";
    case DOPT_INVALID_ARGUMENT: return "InvalidArgument";
    case DOPT_INTERNAL_ERROR: return "InternalError";
  }
  return "Unknown";
}

const char* dopt_version(void) { return "1.0.0"; }

dopt_status dopt_dataset_synthetic(size_t n, size_t d, double sigma_x, double sigma_beta,
                                   double c_a, uint64_t seed, dopt_dataset** out) {
  if (!out) return fail(DOPT_INVALID_ARGUMENT, "out is NULL");
  *out = nullptr;
  if (n < 1 || d < 1 || !(sigma_x > 0) || !(sigma_beta > 0) || !(c_a > 0)) {
    return fail(DOPT_INVALID_CONFIG, "InvalidConfig: synthetic parameters must be positive");
  }
  return guarded([&] {
    dopt::SyntheticSpec spec{n, d, sigma_x, sigma_beta, c_a};
    *out = new dopt_dataset{dopt::sample_synthetic(spec, seed).features()};
  });
}

dopt_status dopt_dataset_from_array(const double* features, size_t n, size_t d, dopt_dataset** out) {
  if (!out || !features) return fail(DOPT_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  if (n < 1 || d < 1) return fail(DOPT_DIMENSION_MISMATCH, "DimensionMismatch: empty feature matrix");
  return guarded([&] {
    dopt::Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::memcpy(x.data(), features, n * d * sizeof(double));
    *out = new dopt_dataset{dopt::FeatureMatrix(std::move(x))};
  });
}

dopt_status dopt_dataset_load_csv(const char* features_csv, const char* absolute_csv,
                                  const char* comparisons_csv, dopt_dataset** out) {
  if (!out || !features_csv) return fail(DOPT_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    dopt::Dataset ds = dopt::load_dataset(features_csv, absolute_csv ? absolute_csv : "",
                                          comparisons_csv ? comparisons_csv : "");
    *out = new dopt_dataset{std::move(ds.features)};
  });
}

dopt_status dopt_dataset_shape(const dopt_dataset* dataset, size_t* n, size_t* d) {
  if (!dataset) return fail(DOPT_INVALID_ARGUMENT, "dataset is NULL");
  if (n) *n = dataset->features.samples();
  if (d) *d = dataset->features.dim();
  return DOPT_OK;
}

void dopt_dataset_free(dopt_dataset* dataset) { delete dataset; }

dopt_status dopt_select(const dopt_dataset* dataset, const char* algorithm, const size_t* absolute,
                        size_t n_absolute, size_t k, double lambda, dopt_pair* out_pairs,
                        double* out_objective) {
  if (!dataset || !algorithm || (!absolute && n_absolute > 0) || (!out_pairs && k > 0)) {
    return fail(DOPT_INVALID_ARGUMENT, "NULL argument");
  }
  const auto algo = dopt::parse_algorithm(algorithm);
  if (!algo) return fail(DOPT_INVALID_CONFIG, std::string("InvalidConfig: unknown algorithm '") + algorithm + "'");
  if (k < 1) return fail(DOPT_INVALID_CONFIG, "InvalidConfig: k must be at least 1");
  return guarded([&] {
    std::vector<std::size_t> abs(absolute, absolute + n_absolute);
    dopt::SelectionProblem problem{dataset->features, abs, lambda, k, {}, {}, 0};
    const dopt::SelectionTrace trace = dopt::run_algorithm(*algo, problem);
    for (std::size_t t = 0; t < trace.selected.size(); ++t) {
      out_pairs[t] = {trace.selected[t].i, trace.selected[t].j};
    }
    if (out_objective) *out_objective = trace.objective_gain();
  });
}

dopt_status dopt_run(const char* command, const char* config_json, dopt_report** out) {
  if (!out || !command) return fail(DOPT_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    nlohmann::json j = config_json && *config_json ? nlohmann::json::parse(config_json)
                                                   : nlohmann::json::object();
    if (!j.is_object()) throw dopt::Error(dopt::Errc::invalid_config, "config must be a JSON object");
    j["command"] = command;
    const dopt::RunConfig config = dopt::config_from_json(j);
    auto* r = new dopt_report{dopt::run_command(config), {}, {}};
    r->hash = dopt::report_hash(r->report);
    r->json = dopt::dump_json(dopt::report_to_json(r->report));
    *out = r;
  });
}

int dopt_report_passed(const dopt_report* report) { return report && report->report.passed ? 1 : 0; }

const char* dopt_report_hash(const dopt_report* report) { return report ? report->hash.c_str() : ""; }

const char* dopt_report_json(const dopt_report* report) { return report ? report->json.c_str() : ""; }

const char* dopt_report_summary(const dopt_report* report) {
  return report ? report->report.summary.c_str() : "";
}

dopt_status dopt_report_write(const dopt_report* report, dopt_format format, const char* path) {
  if (!report || !path) return fail(DOPT_INVALID_ARGUMENT, "NULL argument");
  return guarded([&] {
    dopt::emit_report(report->report,
                      format == DOPT_FORMAT_CSV ? dopt::ReportFormat::csv : dopt::ReportFormat::json,
                      path);
  });
}

void dopt_report_free(dopt_report* report) { delete report; }

}  // extern "C"
