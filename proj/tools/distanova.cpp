#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "distanova/classical.hpp"
#include "distanova/core.hpp"
#include "distanova/dbf.hpp"
#include "distanova/distances.hpp"
#include "distanova/gwas.hpp"
#include "distanova/permutation.hpp"
#include "distanova/simulate.hpp"
#include "distanova/validation.hpp"

namespace {

using namespace distanova;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDegenerate = 3;

struct LabeledTable {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

LabeledTable read_numeric_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  LabeledTable table;
  {
    std::stringstream header(line);
    std::string field;
    bool first = true;
    while (std::getline(header, field, '\t')) {
      if (first)
        first = false;
      else
        table.columns.push_back(field);
    }
  }
  if (table.columns.empty()) throw DataError(path.string() + ": no data columns");
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string field;
    std::vector<double> row;
    bool first = true;
    while (std::getline(fields, field, '\t')) {
      if (first) {
        table.ids.push_back(field);
        first = false;
        continue;
      }
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) +
                        ": token '" + field + "' is not numeric");
      }
    }
    if (row.size() != table.columns.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": wrong field count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path.string() + ": no data rows");
  table.values.resize(rows.size(), table.columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < table.columns.size(); ++j) table.values(i, j) = rows[i][j];
  return table;
}

std::vector<int> read_labels(const std::filesystem::path& path,
                             const std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  std::unordered_map<std::string, int> by_id;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 2 fields");
    try {
      by_id[line.substr(0, tab)] = std::stoi(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": group must be an integer");
    }
  }
  std::vector<int> labels;
  labels.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw DataError(path.string() + ": no group for sample '" + id + "'");
    labels.push_back(it->second);
  }
  return labels;
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_scan(const std::filesystem::path& geno_path, const std::filesystem::path& pheno_path,
             const std::filesystem::path& out_dir, gwas::ScanOptions options,
             const std::vector<std::string>& measure_names) {
  options.measures.clear();
  for (const auto& name : measure_names) {
    const auto m = gwas::measure_from_name(name);
    if (!m) {
      std::cerr << "unknown measure '" << name << "'\n";
      return kExitUsage;
    }
    options.measures.push_back(*m);
  }
  const auto geno = gwas::load_genotypes(geno_path);
  const auto pheno = gwas::load_phenotype(pheno_path);
  const auto result = gwas::scan(geno, pheno, options);
  std::filesystem::create_directories(out_dir);
  gwas::export_tsv(result, out_dir / "scan.tsv");
  gwas::export_manhattan_csv(result, out_dir / "manhattan.csv");
  gwas::export_summary_json(result, out_dir / "summary.json");
  for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << '\n';
  std::cout << "scanned " << result.windows.size() << " windows x "
            << result.measures.size() << " measures -> " << (out_dir / "scan.tsv").string()
            << '\n';
  return kExitOk;
}

int run_test(const std::filesystem::path& data_path, const std::filesystem::path& labels_path,
             const std::string& family, const std::string& measure, const std::string& engine,
             std::uint64_t seed, long n_pi, long skew_draws, int threads) {
  DistanceMatrix delta{Eigen::MatrixXd::Zero(1, 1)};
  std::vector<int> raw_labels;
  if (family == "genotype") {
    const auto geno = gwas::load_genotypes(data_path);
    GenotypeWindow window;
    window.n = geno.n_subjects();
    window.p = geno.n_snps();
    window.counts.resize(static_cast<std::size_t>(window.n) * window.p);
    for (int i = 0; i < window.n; ++i)
      for (int s = 0; s < window.p; ++s) {
        const auto g = geno.at(i, s);
        if (g < 0)
          throw DataError("genotype file contains NA calls; use 'distanova scan' with a "
                          "missing-data policy");
        window.counts[static_cast<std::size_t>(i) * window.p + s] = g;
      }
    raw_labels = read_labels(labels_path, geno.subjects);
    const auto m = gwas::measure_from_name(measure);
    if (!m) throw InvalidInput("unknown genotype measure '" + measure + "'");
    delta = pairwise_matrix(window, *m, threads);
  } else if (family == "vector") {
    const auto table = read_numeric_tsv(data_path);
    raw_labels = read_labels(labels_path, table.ids);
    if (measure == "mahalanobis_total" || measure == "mahalanobis_within") {
      delta = mahalanobis_metric(VectorDataset{table.values}, GroupAssignment(raw_labels),
                                 measure == "mahalanobis_total" ? MahalanobisKind::Total
                                                                : MahalanobisKind::Within);
    } else {
      VectorMeasure m;
      if (measure == "euclidean") m = VectorMeasure::Euclidean;
      else if (measure == "manhattan") m = VectorMeasure::Manhattan;
      else if (measure == "maximum") m = VectorMeasure::Maximum;
      else if (measure == "canberra") m = VectorMeasure::Canberra;
      else if (measure == "bray_curtis") m = VectorMeasure::BrayCurtis;
      else throw InvalidInput("unknown vector measure '" + measure + "'");
      delta = pairwise_matrix(VectorDataset{table.values}, m, threads);
    }
  } else if (family == "curve") {
    const auto table = read_numeric_tsv(data_path);
    raw_labels = read_labels(labels_path, table.ids);
    CurveSet curves;
    curves.grid.reserve(table.columns.size());
    for (const auto& column : table.columns) {
      try {
        curves.grid.push_back(std::stod(column));
      } catch (const std::exception&) {
        throw DataError("curve data: header columns must be numeric grid points");
      }
    }
    curves.values = table.values;
    CurveMeasure m;
    if (measure == "l2") m = CurveMeasure::L2;
    else if (measure == "curvature") m = CurveMeasure::Curvature;
    else if (measure == "visual_l2") m = CurveMeasure::VisualL2;
    else throw InvalidInput("unknown curve measure '" + measure + "'");
    delta = pairwise_matrix(curves, m, threads);
  } else {
    throw InvalidInput("unknown family '" + family + "'");
  }

  const GroupAssignment groups(raw_labels);
  const auto gower = gower_center(delta);
  const auto projector = group_projector(groups);
  const auto decomposition = variance_decomposition(gower, projector);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "{\n  \"n\": %d,\n  \"groups\": %d,\n  \"total\": %.10g,\n"
                "  \"between\": %.10g,\n  \"within\": %.10g,\n",
                groups.n(), groups.group_count(), decomposition.total,
                decomposition.between, decomposition.within);
  std::cout << buf;
  if (engine == "approx") {
    DbfOptions opt;
    opt.skew_draws = skew_draws;
    opt.seed = seed;
    opt.threads = threads;
    const auto outcome = run_dbf_test(gower, groups, opt);
    if (outcome.status == DbfStatus::DegenerateNull) {
      std::cout << "  \"status\": \"degenerate\"\n}\n";
      return kExitDegenerate;
    }
    if (outcome.status == DbfStatus::DegenerateWithin) {
      std::cout << "  \"f\": \"inf\",\n  \"p_value\": 0,\n"
                   "  \"status\": \"degenerate_within\"\n}\n";
      return kExitDegenerate;
    }
    std::snprintf(buf, sizeof buf,
                  "  \"f\": %.10g,\n  \"mu\": %.10g,\n  \"sigma\": %.10g,\n"
                  "  \"gamma\": %.10g,\n  \"p_value\": %.10g,\n  \"engine\": \"approx\"\n}\n",
                  outcome.f_hat, outcome.null->mu, outcome.null->sigma,
                  outcome.null->gamma, outcome.p_value);
    std::cout << buf;
    return kExitOk;
  }
  permutation::PermutationPlan plan;
  plan.mode = engine == "exact" ? permutation::Mode::Exact : permutation::Mode::MonteCarlo;
  plan.n_pi = n_pi;
  plan.seed = seed;
  plan.threads = threads;
  const double f_hat = dbf_statistic(decomposition);
  const auto f_values = perm_F_values(gower, projector, plan);
  std::snprintf(buf, sizeof buf,
                "  \"f\": %.10g,\n  \"p_value\": %.10g,\n  \"permutations\": %zu,\n"
                "  \"engine\": \"%s\"\n}\n",
                f_hat, permutation::perm_pvalue(f_hat, f_values), f_values.size(),
                engine.c_str());
  std::cout << buf;
  return kExitOk;
}

int run_simulate(const std::string& scenario, const std::string& measure,
                 simulate::SimConfig config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<simulate::RunRecord> records;
  if (scenario == "univariate_normal" || scenario == "mvn_wishart") {
    config.scenario = scenario == "univariate_normal" ? simulate::Scenario::UnivariateNormal
                                                      : simulate::Scenario::MvnWishart;
    const auto summary = simulate::run_table1(config, &records);
    const auto path = out_dir / (scenario + "_comparison.csv");
    simulate::write_comparison_csv(path, records, summary);
    std::printf("%s: mean |p_approx - p_ref| = %.6g (sd %.6g, %d runs) -> %s\n",
                scenario.c_str(), summary.mean_abs_diff, summary.sd_abs_diff, summary.runs,
                path.string().c_str());
    return kExitOk;
  }
  if (scenario == "vector_normal" || scenario == "snp_resample" ||
      scenario == "bezier_curves") {
    simulate::Table2Distance distance;
    distance.name = measure;
    if (scenario == "vector_normal") {
      if (measure == "euclidean") distance.vector = VectorMeasure::Euclidean;
      else if (measure == "manhattan") distance.vector = VectorMeasure::Manhattan;
      else if (measure == "maximum") distance.vector = VectorMeasure::Maximum;
      else if (measure == "canberra") distance.vector = VectorMeasure::Canberra;
      else if (measure == "bray_curtis") distance.vector = VectorMeasure::BrayCurtis;
      else throw InvalidInput("vector_normal requires a vector measure");
      config.scenario = simulate::Scenario::UnivariateNormal;
    } else if (scenario == "snp_resample") {
      const auto m = gwas::measure_from_name(measure);
      if (!m) throw InvalidInput("snp_resample requires a genetic measure");
      distance.genetic = *m;
      config.scenario = simulate::Scenario::SnpResample;
    } else {
      if (measure == "l2") distance.curve = CurveMeasure::L2;
      else if (measure == "curvature") distance.curve = CurveMeasure::Curvature;
      else if (measure == "visual_l2") distance.curve = CurveMeasure::VisualL2;
      else throw InvalidInput("bezier_curves requires a curve measure");
      config.scenario = simulate::Scenario::BezierCurves;
    }
    const auto summary = simulate::run_table2(config, distance, &records);
    const auto path = out_dir / (scenario + "_" + measure + "_comparison.csv");
    simulate::write_comparison_csv(path, records, summary);
    std::printf("%s/%s: mean |p_approx - p_perm| = %.6g (sd %.6g, %d runs) -> %s\n",
                scenario.c_str(), measure.c_str(), summary.mean_abs_diff,
                summary.sd_abs_diff, summary.runs, path.string().c_str());
    return kExitOk;
  }
  if (scenario == "fig3") {
    const auto result = simulate::run_fig3(config);
    const auto path = out_dir / "fig3_ks.csv";
    simulate::write_fig3_csv(path, result);
    std::printf("fig3: approx-CDF KS reference %.6g -> %s\n", result.ks_reference,
                path.string().c_str());
    return kExitOk;
  }
  std::cerr << "unknown scenario '" << scenario << "'\n";
  return kExitUsage;
}

int run_validate(std::uint64_t seed, int threads) {
  const auto results = validation::run_all(seed, threads);
  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] %-20s %s (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str(), r.elapsed_seconds);
    all = all && r.passed;
  }
  return all ? kExitOk : kExitDegenerate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distanova: distance-based analysis of variance with a permutation-free "
               "approximate null"};
  app.require_subcommand(1);

  // scan
  auto* scan_cmd = app.add_subcommand("scan", "sliding-window genome scan");
  std::filesystem::path geno_path, pheno_path, out_dir = ".";
  gwas::ScanOptions scan_options;
  std::vector<std::string> measure_names{"ibs"};
  std::string engine_name = "approx";
  std::string missing_name = "mode-impute";
  scan_cmd->add_option("--geno", geno_path, "genotype TSV")->required();
  scan_cmd->add_option("--pheno", pheno_path, "phenotype TSV")->required();
  scan_cmd->add_option("--width", scan_options.width, "SNPs per window (default 5)");
  scan_cmd->add_option("--measures", measure_names,
                       "comma-separated genetic distances "
                       "(ibs,simple_matching,sokal_sneath,rti,hamman1)")
      ->delimiter(',');
  scan_cmd->add_option("--engine", engine_name, "approx | monte_carlo");
  scan_cmd->add_option("--npi", scan_options.n_pi, "permutations for the monte_carlo engine");
  scan_cmd->add_option("--skew-draws", scan_options.skew_draws,
                       "skewness draws for the approx engine (default 10000)");
  scan_cmd->add_option("--missing", missing_name, "mode-impute | drop-subject");
  scan_cmd->add_option("--seed", scan_options.seed, "global seed");
  int scan_threads = default_threads();
  scan_cmd->add_option("--threads", scan_threads, "worker threads");
  scan_cmd->add_flag("--refine", scan_options.refine,
                     "recompute windows with p < 1e-5 using 10x skewness draws");
  scan_cmd->add_option("--out", out_dir, "output directory")->required();

  // test
  auto* test_cmd = app.add_subcommand("test", "single-dataset DBF test");
  std::filesystem::path data_path, labels_path;
  std::string family = "vector", measure = "euclidean", test_engine = "approx";
  std::uint64_t test_seed = 0;
  long test_npi = 10000, test_skew = 10000;
  int test_threads = default_threads();
  test_cmd->add_option("--data", data_path, "data TSV (see README for formats)")->required();
  test_cmd->add_option("--labels", labels_path, "labels TSV: subject<TAB>group")->required();
  test_cmd->add_option("--family", family, "vector | genotype | curve");
  test_cmd->add_option("--measure", measure, "distance measure for the family");
  test_cmd->add_option("--engine", test_engine, "approx | exact | monte_carlo");
  test_cmd->add_option("--seed", test_seed, "seed");
  test_cmd->add_option("--npi", test_npi, "permutations for monte_carlo");
  test_cmd->add_option("--skew-draws", test_skew, "skewness draws for approx");
  test_cmd->add_option("--threads", test_threads, "worker threads");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "null-calibration studies");
  std::string scenario = "univariate_normal", sim_measure = "euclidean";
  simulate::SimConfig sim_config;
  sim_config.threads = default_threads();
  std::filesystem::path sim_out = ".";
  sim_cmd->add_option("--scenario", scenario,
                      "univariate_normal | mvn_wishart | vector_normal | snp_resample | "
                      "bezier_curves | fig3");
  sim_cmd->add_option("--measure", sim_measure, "distance for the table-2 style scenarios");
  sim_cmd->add_option("--runs", sim_config.runs, "Monte Carlo runs (default 200)");
  sim_cmd->add_option("--n", sim_config.n, "samples per run");
  sim_cmd->add_option("--g", sim_config.g, "groups (univariate_normal)");
  sim_cmd->add_option("--p", sim_config.p, "dimensions (mvn_wishart / vector_normal)");
  sim_cmd->add_option("--npi", sim_config.n_pi, "reference permutation budget");
  sim_cmd->add_option("--skew-draws", sim_config.skew_draws, "approx skewness draws");
  sim_cmd->add_option("--seed", sim_config.seed, "global seed");
  sim_cmd->add_option("--threads", sim_config.threads, "worker threads");
  sim_cmd->add_option("--out", sim_out, "output directory")->required();

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "oracle-equivalence suite");
  std::uint64_t validate_seed = 42;
  int validate_threads = default_threads();
  validate_cmd->add_option("--seed", validate_seed, "seed");
  validate_cmd->add_option("--threads", validate_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*scan_cmd) {
      if (engine_name == "monte_carlo")
        scan_options.engine = gwas::Engine::MonteCarlo;
      else if (engine_name == "approx")
        scan_options.engine = gwas::Engine::Approx;
      else {
        std::cerr << "unknown engine '" << engine_name << "'\n";
        return kExitUsage;
      }
      if (missing_name == "drop-subject")
        scan_options.missing = gwas::MissingPolicy::DropSubject;
      else if (missing_name != "mode-impute") {
        std::cerr << "unknown missing policy '" << missing_name << "'\n";
        return kExitUsage;
      }
      scan_options.threads = scan_threads;
      return run_scan(geno_path, pheno_path, out_dir, scan_options, measure_names);
    }
    if (*test_cmd)
      return run_test(data_path, labels_path, family, measure, test_engine, test_seed,
                      test_npi, test_skew, test_threads);
    if (*sim_cmd) return run_simulate(scenario, sim_measure, sim_config, sim_out);
    if (*validate_cmd) return run_validate(validate_seed, validate_threads);
  } catch (const DegeneracyError& e) {
    std::cerr << "degenerate: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
