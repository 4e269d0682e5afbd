#include "cli.hpp"

#include "pipeline.hpp"

#include "cpsc/error.hpp"
#include "cpsc/fixtures.hpp"
#include "cpsc/format.hpp"
#include "cpsc/metrics.hpp"
#include "cpsc/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cpsc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by every subcommand that runs a clustering method.
struct CommonFlags {
  std::string input;
  std::optional<std::string> label_column;
  std::string normalize = "minmax";
  int k_clusters = 0;
  std::uint64_t seed = kDefaultSeed;
  int jobs = 1;
  std::string out = ".";
  std::string format = "json";
  MethodConfig method;
};

void add_method_flags(CLI::App& app, CommonFlags& f) {
  app.add_option("--input", f.input, "CSV file with one point per row")->required();
  app.add_option("--label-column", f.label_column,
                 "Ground-truth column: header name or 0-based index (-1 = last)");
  app.add_option("--normalize", f.normalize, "Feature scaling before clustering")
      ->check(CLI::IsMember({"minmax", "zscore", "none"}));
  app.add_option("--k-clusters", f.k_clusters, "Number of clusters")->required();
  app.add_option("--sigma", f.method.sigma, "Gaussian bandwidth (njw, cnn, np, hybrid)");
  app.add_option("--epsilon", f.method.epsilon, "Neighbourhood radius (np, cpsc, cpsca, hybrid)");
  app.add_option("--k-nn", f.method.k_nn, "Nearest-neighbour count");
  app.add_option("--gamma", f.method.gamma, "Exponent for pg");
  app.add_option("--bandwidth", f.method.bandwidth, "KDE bandwidth for --ncm kde");
  app.add_option("--ncm", f.method.ncm, "Non-conformity measure")->check(CLI::IsMember({"knn", "kde"}));
  app.add_option("--deterministic-tau", f.method.deterministic_tau,
                 "Use this fixed tie weight in (0, 1] instead of random smoothing");
  app.add_option("--seed", f.seed, "Random seed")->capture_default_str();
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::invalid_argument("failed writing '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::invalid_argument("cannot create output directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::string labels_csv(const std::vector<int>& labels) {
  std::string s = "point_index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  }
  return s;
}

std::string csv_value(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

// One-row CSV with the given columns taken from a flat JSON object.
std::string report_csv(const json& row, const std::vector<std::string>& columns) {
  std::string header;
  std::string values;
  for (const auto& c : columns) {
    header += (header.empty() ? "" : ",") + c;
    values += (c == columns.front() ? "" : ",") + csv_value(row.contains(c) ? row.at(c) : json());
  }
  return header + "\n" + values + "\n";
}

struct LoadedData {
  Dataset data;
  DistanceMatrix dm;
};

LoadedData load(const std::string& path, const std::optional<std::string>& label_column,
                const std::string& normalize) {
  Dataset raw = load_csv(path, label_column);
  raw.validate();
  LoadedData loaded{apply_normalization(raw, normalize), {}};
  loaded.dm = pairwise_distances(loaded.data);
  return loaded;
}

json eigenvalues_json(const Eigen::VectorXd& values) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) arr.push_back(values(i));
  return arr;
}

json run_report(const std::string& command, const CommonFlags& f, const LoadedData& loaded,
                const MethodRun& run) {
  json report;
  report["command"] = command;
  report["input"] = f.input;
  report["normalize"] = f.normalize;
  report["n_points"] = loaded.data.size();
  report["k_clusters"] = run.result.k_clusters;
  report["seed"] = f.seed;
  report["parameters"] = run.parameters;
  report["clusters_found"] = count_clusters(run.result.labels);
  report["distortion"] = run.result.distortion;
  report["restarts"] = run.result.restarts;
  report["eigenvalues"] = eigenvalues_json(run.result.eigenvalues);
  report["metrics"] = evaluate(loaded.data, loaded.dm, run.result.labels);
  if (run.affinity) report["warnings"] = run.affinity->warnings;
  return report;
}

json flatten_for_csv(const json& report) {
  json row = report["metrics"];
  row["method"] = report["parameters"]["method"];
  row["k_clusters"] = report["k_clusters"];
  row["seed"] = report["seed"];
  row["distortion"] = report["distortion"];
  for (const char* key : {"sigma", "epsilon", "k_nn", "gamma", "bandwidth", "ncm"}) {
    if (report["parameters"].contains(key)) row[key] = report["parameters"][key];
  }
  return row;
}

const std::vector<std::string> kReportColumns = {"method", "k_clusters", "seed",  "sigma", "epsilon",
                                                 "k_nn",   "gamma",      "bandwidth", "ncm", "ari",
                                                 "nmi",    "ce",         "silhouette", "distortion"};

int cmd_cluster(const CommonFlags& f, bool dump_affinity, bool dump_graph, std::ostream& out) {
  if (f.method.tune) throw std::invalid_argument("use the tune subcommand for parameter search");
  validate_method(f.method);
  const LoadedData loaded = load(f.input, f.label_column, f.normalize);
  const MethodRun run = run_method(loaded.data, loaded.dm, f.method, f.k_clusters, f.seed, dump_affinity);
  const fs::path dir = prepare_out_dir(f.out);

  write_file(dir / "labels.csv", labels_csv(run.result.labels));
  const json report = run_report("cluster", f, loaded, run);
  if (f.format == "json") {
    write_file(dir / "report.json", report.dump(2) + "\n");
  } else {
    write_file(dir / "report.csv", report_csv(flatten_for_csv(report), kReportColumns));
  }
  if (dump_affinity && run.affinity) {
    std::ostringstream s;
    write_affinity_csv(*run.affinity, s);
    write_file(dir / "affinity.csv", s.str());
  }
  if (dump_graph && run.graph) {
    std::ostringstream s;
    write_edge_list_csv(*run.graph, loaded.dm, s);
    write_file(dir / "graph.csv", s.str());
  }
  out << "clusters: " << count_clusters(run.result.labels) << "\n";
  const json& m = report["metrics"];
  if (!m["ari"].is_null()) {
    out << "ARI " << csv_value(m["ari"]) << "  NMI " << csv_value(m["nmi"]) << "  CE "
        << csv_value(m["ce"]) << "\n";
  }
  return 0;
}

int cmd_tune(CommonFlags f, std::ostream& out) {
  if (f.method.method.empty()) f.method.method = "cpsca";
  if (f.method.method != "cpsca" && f.method.method != "hybrid") {
    throw std::invalid_argument("--method for tune must be cpsca or hybrid");
  }
  f.method.tune = true;
  validate_method(f.method);
  const LoadedData loaded = load(f.input, f.label_column, f.normalize);
  const MethodRun run = run_method(loaded.data, loaded.dm, f.method, f.k_clusters, f.seed, false, f.jobs);
  const fs::path dir = prepare_out_dir(f.out);

  write_file(dir / "labels.csv", labels_csv(run.result.labels));
  std::ostringstream grid;
  write_grid_csv(*run.tune, grid);
  write_file(dir / "grid.csv", grid.str());

  json report = run_report("tune", f, loaded, run);
  std::size_t failed = 0;
  for (const TuneCell& c : run.tune->grid) failed += c.status == CellStatus::ok ? 0 : 1;
  report["grid_cells"] = run.tune->grid.size();
  report["grid_failed_cells"] = failed;
  report["best_epsilon"] = run.tune->best_epsilon;
  report["best_k_nn"] = run.tune->best_k_nn;
  report["best_silhouette"] = run.tune->best_silhouette;
  if (f.format == "json") {
    write_file(dir / "tune_report.json", report.dump(2) + "\n");
  } else {
    json row = flatten_for_csv(report);
    row["best_silhouette"] = report["best_silhouette"];
    std::vector<std::string> cols = kReportColumns;
    cols.push_back("best_silhouette");
    write_file(dir / "tune_report.csv", report_csv(row, cols));
  }
  out << "best epsilon " << format_double(run.tune->best_epsilon) << "  k_nn " << run.tune->best_k_nn
      << "  silhouette " << format_double(run.tune->best_silhouette) << "\n";
  const json& m = report["metrics"];
  if (!m["ari"].is_null()) {
    out << "ARI " << csv_value(m["ari"]) << "  NMI " << csv_value(m["nmi"]) << "  CE "
        << csv_value(m["ce"]) << "\n";
  }
  return 0;
}

// ---- benchmark -------------------------------------------------------------

struct DatasetEntry {
  std::string name;
  fs::path path;
  std::optional<std::string> label_column;
  std::optional<int> k_clusters;
  std::string normalize;
};

struct MethodEntry {
  std::string name;
  MethodConfig config;
};

struct Manifest {
  std::vector<DatasetEntry> datasets;
  std::vector<MethodEntry> methods;
};

template <typename T>
std::optional<T> optional_field(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return obj.at(key).get<T>();
}

Manifest parse_manifest(const fs::path& path, const std::string& default_normalize) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest '" + path.string() + "'");
  Manifest manifest;
  try {
    const json doc = json::parse(in);
    const fs::path base = path.parent_path();
    for (const json& d : doc.at("datasets")) {
      DatasetEntry e;
      e.path = d.at("path").get<std::string>();
      if (e.path.is_relative()) e.path = base / e.path;
      e.name = d.contains("name") ? d.at("name").get<std::string>() : e.path.stem().string();
      if (d.contains("label_column") && !d.at("label_column").is_null()) {
        const json& lc = d.at("label_column");
        e.label_column = lc.is_string() ? lc.get<std::string>() : std::to_string(lc.get<int>());
      }
      e.k_clusters = optional_field<int>(d, "k_clusters");
      e.normalize = d.value("normalize", default_normalize);
      manifest.datasets.push_back(std::move(e));
    }
    for (const json& m : doc.at("methods")) {
      MethodEntry e;
      e.config.method = m.at("method").get<std::string>();
      e.name = m.value("name", e.config.method);
      e.config.sigma = optional_field<double>(m, "sigma");
      e.config.epsilon = optional_field<double>(m, "epsilon");
      e.config.k_nn = optional_field<int>(m, "k_nn");
      e.config.gamma = optional_field<double>(m, "gamma");
      e.config.bandwidth = optional_field<double>(m, "bandwidth");
      e.config.ncm = m.value("ncm", std::string("knn"));
      e.config.deterministic_tau = optional_field<double>(m, "deterministic_tau");
      e.config.tune = m.value("tune", false);
      e.config.grid_epsilon = m.value("grid_epsilon", std::vector<double>{});
      e.config.grid_k = m.value("grid_k", std::vector<int>{});
      manifest.methods.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument("malformed manifest '" + path.string() + "': " + e.what());
  }
  if (manifest.datasets.empty() || manifest.methods.empty()) {
    throw std::invalid_argument("manifest needs at least one dataset and one method");
  }
  return manifest;
}

std::string safe_name(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

std::string table_value(const json& v) {
  if (v.is_null()) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v.get<double>());
  return buf;
}

struct CellOutcome {
  bool ok = false;
  int error_code = 0;
  std::string error;
  json run;
  std::vector<int> labels;
  double wall_ms = 0.0;
};

int cmd_benchmark(const std::string& manifest_path, const std::string& normalize, std::uint64_t seed,
                  int jobs, const std::string& out_dir, std::ostream& out) {
  const Manifest manifest = parse_manifest(manifest_path, normalize);
  const std::size_t nd = manifest.datasets.size();
  const std::size_t nm = manifest.methods.size();

  std::vector<std::optional<LoadedData>> loaded(nd);
  std::vector<std::string> load_errors(nd);
  std::vector<int> ks(nd, 0);
  for (std::size_t d = 0; d < nd; ++d) {
    const DatasetEntry& e = manifest.datasets[d];
    try {
      loaded[d] = load(e.path.string(), e.label_column, e.normalize);
      if (e.k_clusters) {
        ks[d] = *e.k_clusters;
      } else if (loaded[d]->data.labels) {
        ks[d] = count_clusters(*loaded[d]->data.labels);
      } else {
        throw std::invalid_argument("dataset '" + e.name + "' has no labels and no k_clusters");
      }
    } catch (const std::exception& ex) {
      loaded[d].reset();
      load_errors[d] = ex.what();
    }
  }

  std::vector<CellOutcome> cells(nd * nm);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < cells.size(); c = next++) {
      const std::size_t d = c / nm;
      const std::size_t m = c % nm;
      CellOutcome& cell = cells[c];
      cell.run = {{"dataset", manifest.datasets[d].name}, {"method", manifest.methods[m].name}};
      if (!loaded[d]) {
        cell.error = load_errors[d];
        cell.error_code = 2;
        continue;
      }
      const auto start = std::chrono::steady_clock::now();
      try {
        const LoadedData& ld = *loaded[d];
        const MethodRun run = run_method(ld.data, ld.dm, manifest.methods[m].config, ks[d],
                                         derive_seed(seed, {d, m}), false, 1);
        cell.labels = run.result.labels;
        cell.run["k_clusters"] = ks[d];
        cell.run["parameters"] = run.parameters;
        cell.run["metrics"] = evaluate(ld.data, ld.dm, run.result.labels);
        cell.ok = true;
      } catch (const std::invalid_argument& ex) {
        cell.error = ex.what();
        cell.error_code = 1;
      } catch (const DataError& ex) {
        cell.error = ex.what();
        cell.error_code = 2;
      } catch (const std::exception& ex) {
        cell.error = ex.what();
        cell.error_code = 3;
      }
      cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const fs::path dir = prepare_out_dir(out_dir);
  const fs::path label_dir = dir / "labels";
  prepare_out_dir(label_dir.string());

  json runs = json::array();
  std::string timings = "dataset,method,wall_ms\n";
  for (const char* metric : {"ari", "nmi", "ce"}) {
    std::string table = "dataset";
    for (const auto& m : manifest.methods) table += "," + m.name;
    table += "\n";
    for (std::size_t d = 0; d < nd; ++d) {
      table += manifest.datasets[d].name;
      for (std::size_t m = 0; m < nm; ++m) {
        const CellOutcome& cell = cells[d * nm + m];
        table += "," + (cell.ok ? table_value(cell.run["metrics"][metric]) : std::string("ERR"));
      }
      table += "\n";
    }
    write_file(dir / (std::string(metric) + ".csv"), table);
    if (std::string(metric) == "ari") out << table;
  }

  std::size_t failures = 0;
  int first_code = 0;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellOutcome& cell = cells[c];
    json run = cell.run;
    run["status"] = cell.ok ? "ok" : "error";
    if (!cell.ok) {
      run["error"] = cell.error;
      ++failures;
      if (first_code == 0) first_code = cell.error_code;
    } else {
      const std::string file = safe_name(manifest.datasets[c / nm].name) + "__" +
                               safe_name(manifest.methods[c % nm].name) + ".csv";
      write_file(label_dir / file, labels_csv(cell.labels));
      run["labels_file"] = "labels/" + file;
    }
    runs.push_back(std::move(run));
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", cell.wall_ms);
    timings += manifest.datasets[c / nm].name + "," + manifest.methods[c % nm].name + "," + ms + "\n";
  }
  const json doc = {{"seed", seed}, {"runs", runs}};
  write_file(dir / "runs.json", doc.dump(2) + "\n");
  write_file(dir / "timings.csv", timings);

  if (failures == cells.size()) return first_code == 0 ? 3 : first_code;
  return 0;
}

int cmd_generate(const std::string& fixture, std::uint64_t seed, int per_cluster, double noise,
                 const std::string& path, std::ostream& out) {
  Dataset data;
  if (fixture == "blobs") {
    data = make_blobs(seed, per_cluster, noise);
  } else {
    data = make_moons(seed, per_cluster, noise);
  }
  std::ostringstream s;
  write_csv(data, s);
  const fs::path target(path);
  if (target.has_parent_path()) prepare_out_dir(target.parent_path().string());
  write_file(target, s.str());
  out << "wrote " << data.size() << " points to " << path << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conformal-prediction spectral clustering and baselines"};
  app.require_subcommand(1);

  CommonFlags cluster_flags;
  bool dump_affinity = false;
  bool dump_graph = false;
  CLI::App* cluster = app.add_subcommand("cluster", "Cluster one dataset with one method");
  add_method_flags(*cluster, cluster_flags);
  cluster->add_option("--method", cluster_flags.method.method, "Affinity method")->required();
  cluster->add_flag("--dump-affinity", dump_affinity, "Also write affinity.csv");
  cluster->add_flag("--dump-graph", dump_graph, "Also write the neighbourhood graph as graph.csv");

  CommonFlags tune_flags;
  CLI::App* tune = app.add_subcommand("tune", "Silhouette grid search for cpsca or hybrid");
  add_method_flags(*tune, tune_flags);
  tune->add_option("--method", tune_flags.method.method, "cpsca (default) or hybrid");
  tune->add_option("--grid-epsilon", tune_flags.method.grid_epsilon, "Epsilon values to try");
  tune->add_option("--grid-k", tune_flags.method.grid_k, "k_nn values to try");
  tune->add_option("--jobs", tune_flags.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string manifest;
  std::string bench_normalize = "minmax";
  std::uint64_t bench_seed = kDefaultSeed;
  int bench_jobs = 1;
  std::string bench_out = ".";
  CLI::App* bench = app.add_subcommand("benchmark", "Run every method on every dataset of a manifest");
  bench->add_option("--manifest", manifest, "JSON manifest with datasets[] and methods[]")->required();
  bench->add_option("--normalize", bench_normalize, "Default feature scaling")
      ->check(CLI::IsMember({"minmax", "zscore", "none"}));
  bench->add_option("--seed", bench_seed, "Random seed");
  bench->add_option("--jobs", bench_jobs, "Concurrent cells")->check(CLI::PositiveNumber);
  bench->add_option("--out", bench_out, "Output directory");

  std::string fixture;
  std::uint64_t gen_seed = kDefaultSeed;
  int per_cluster = 30;
  double noise = 0.05;
  std::string gen_out;
  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic fixture as CSV");
  generate->add_option("--fixture", fixture, "blobs or moons")->required()->check(CLI::IsMember({"blobs", "moons"}));
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--per-cluster", per_cluster, "Points per cluster")->check(CLI::PositiveNumber);
  generate->add_option("--noise", noise, "Gaussian jitter (standard deviation)");
  generate->add_option("--out", gen_out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (cluster->parsed()) return cmd_cluster(cluster_flags, dump_affinity, dump_graph, out);
    if (tune->parsed()) return cmd_tune(tune_flags, out);
    if (bench->parsed()) return cmd_benchmark(manifest, bench_normalize, bench_seed, bench_jobs, bench_out, out);
    if (generate->parsed()) return cmd_generate(fixture, gen_seed, per_cluster, noise, gen_out, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace cpsc::cli
