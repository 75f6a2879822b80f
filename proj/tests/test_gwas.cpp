#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distanova/dbf.hpp"
#include "distanova/gwas.hpp"
#include "distanova/simulate.hpp"
#include "test_util.hpp"

using namespace distanova;
using namespace distanova::gwas;

namespace {

GenotypeMatrix parse_geno(const std::string& text) {
  std::istringstream in(text);
  return read_genotypes(in, "test");
}

Phenotype parse_pheno(const std::string& text) {
  std::istringstream in(text);
  return read_phenotype(in, "test");
}

// case/control cohort with a planted minor-allele enrichment in the cases
GenotypeMatrix planted_cohort(int n_cases, int n_controls, int n_snps, int signal_start,
                              int signal_width, double control_maf, double case_maf,
                              std::uint64_t seed, Phenotype* pheno) {
  SplitMix64 rng(seed);
  GenotypeMatrix geno;
  const int n = n_cases + n_controls;
  for (int i = 0; i < n; ++i) geno.subjects.push_back("s" + std::to_string(i));
  geno.snps.resize(n_snps);
  geno.counts.resize(static_cast<std::size_t>(n) * n_snps);
  for (int s = 0; s < n_snps; ++s) {
    geno.snps[s] = {"1", "rs" + std::to_string(s)};
    const bool in_signal = s >= signal_start && s < signal_start + signal_width;
    for (int i = 0; i < n; ++i) {
      const bool is_case = i < n_cases;
      const double maf = in_signal && is_case ? case_maf : control_maf;
      const int g = (rng.next_double() < maf ? 1 : 0) + (rng.next_double() < maf ? 1 : 0);
      geno.counts[static_cast<std::size_t>(s) * n + i] = static_cast<std::int8_t>(g);
    }
  }
  geno.chromosome_ranges.emplace_back(0, n_snps);
  if (pheno) {
    pheno->subject_ids = geno.subjects;
    pheno->status.assign(n, 0);
    for (int i = 0; i < n_cases; ++i) pheno->status[i] = 1;
  }
  return geno;
}

}  // namespace

TEST_CASE("genotype parser: fixture round trip") {
  const auto geno = parse_geno(
      "subject\t1:rs1\t1:rs2\t2:rs9\n"
      "alice\t0\t1\t2\n"
      "bob\t2\tNA\t0\n");
  CHECK(geno.n_subjects() == 2);
  CHECK(geno.n_snps() == 3);
  CHECK(geno.subjects[0] == "alice");
  CHECK(geno.snps[0].chromosome == "1");
  CHECK(geno.snps[2].id == "rs9");
  CHECK(geno.at(0, 0) == 0);
  CHECK(geno.at(0, 2) == 2);
  CHECK(geno.at(1, 1) == -1);  // NA
  REQUIRE(geno.chromosome_ranges.size() == 2);
  CHECK(geno.chromosome_ranges[0] == std::make_pair<std::size_t, std::size_t>(0, 2));

  // writer round trip
  const auto path = std::filesystem::temp_directory_path() / "dn_geno.tsv";
  write_genotypes(path, geno);
  const auto again = load_genotypes(path);
  CHECK(again.counts == geno.counts);
  CHECK(again.subjects == geno.subjects);
  std::filesystem::remove(path);
}

TEST_CASE("genotype parser: errors carry line numbers") {
  CHECK_THROWS_WITH_AS(parse_geno("subject\t1:rs1\nalice\t3\n"),
                       doctest::Contains("test:2"), DataError);
  CHECK_THROWS_WITH_AS(parse_geno("subject\t1:rs1\nalice\t0\nalice\t1\n"),
                       doctest::Contains("duplicate subject"), DataError);
  CHECK_THROWS_WITH_AS(parse_geno("subject\t1:rs1\nalice\t0\t1\n"),
                       doctest::Contains("expected 2 fields"), DataError);
  CHECK_THROWS_WITH_AS(parse_geno("id\t1:rs1\nalice\t0\n"),
                       doctest::Contains("header"), DataError);
  CHECK_THROWS_WITH_AS(parse_geno("subject\trs1\nalice\t0\n"),
                       doctest::Contains("chr:snp_id"), DataError);
  // a chromosome split into two runs is not genome order
  CHECK_THROWS_WITH_AS(parse_geno("subject\t1:a\t2:b\t1:c\nalice\t0\t0\t0\n"),
                       doctest::Contains("two separate runs"), DataError);
}

TEST_CASE("phenotype parser") {
  const auto pheno = parse_pheno("subject\tstatus\nalice\t1\nbob\t0\n");
  CHECK(pheno.subject_ids.size() == 2);
  CHECK(pheno.status[0] == 1);
  CHECK_THROWS_WITH_AS(parse_pheno("subject\tstatus\nalice\t2\n"),
                       doctest::Contains("status"), DataError);
  CHECK_THROWS_WITH_AS(parse_pheno("subject\tstatus\nalice\t1\nalice\t0\n"),
                       doctest::Contains("duplicate"), DataError);
}

TEST_CASE("windows: per-chromosome stride-1 counting") {
  GenotypeMatrix geno;
  geno.subjects = {"a"};
  for (int s = 0; s < 17; ++s)
    geno.snps.push_back({s < 10 ? "1" : "2", "rs" + std::to_string(s)});
  geno.counts.assign(17, 0);
  geno.chromosome_ranges = {{0, 10}, {10, 17}};
  CHECK(windows(geno, 5).size() == 6 + 3);

  GenotypeMatrix six;
  six.subjects = {"a"};
  six.snps.assign(6, {"1", "x"});
  six.counts.assign(6, 0);
  six.chromosome_ranges = {{0, 6}};
  CHECK(windows(six, 5).size() == 2);
  CHECK(windows(six, 6).size() == 1);
  CHECK(windows(six, 7).empty());
  CHECK_THROWS_AS(windows(six, 0), InvalidInput);
}

TEST_CASE("scan: single window equals the direct composition") {
  Phenotype pheno;
  const auto geno = planted_cohort(10, 10, 5, 0, 0, 0.3, 0.3, 555, &pheno);
  ScanOptions options;
  options.width = 5;
  options.measures = {GeneticMeasure::Ibs};
  options.seed = 77;
  options.threads = 1;
  const auto result = scan(geno, pheno, options);
  REQUIRE(result.windows.size() == 1);
  const double p_scan = result.windows[0].p_values[0];

  // direct path through distances -> core -> moments -> pearson3 with the
  // same derived stream
  GenotypeWindow window;
  window.n = geno.n_subjects();
  window.p = 5;
  window.counts.resize(100);
  for (int i = 0; i < 20; ++i)
    for (int k = 0; k < 5; ++k)
      window.counts[static_cast<std::size_t>(i) * 5 + k] = geno.at(i, k);
  const auto delta = pairwise_matrix(window, GeneticMeasure::Ibs);
  std::vector<int> labels(pheno.status);
  DbfOptions opt;
  opt.seed = window_seed(77, 0, 0, 0);
  const auto outcome = run_dbf_test(gower_center(delta), GroupAssignment(labels), opt);
  CHECK(p_scan == doctest::Approx(outcome.p_value).epsilon(1e-9));
}

TEST_CASE("scan: byte-identical output across thread counts") {
  Phenotype pheno;
  const auto geno = planted_cohort(15, 15, 40, 0, 0, 0.25, 0.25, 99, &pheno);
  ScanOptions options;
  options.width = 5;
  options.measures = {GeneticMeasure::Ibs, GeneticMeasure::SokalSneath};
  options.seed = 5;
  const auto tmp = std::filesystem::temp_directory_path();
  std::vector<std::string> outputs;
  for (int threads : {1, 4}) {
    options.threads = threads;
    const auto result = scan(geno, pheno, options);
    const auto base = tmp / ("dn_scan_t" + std::to_string(threads));
    std::filesystem::create_directories(base);
    export_tsv(result, base / "scan.tsv");
    export_manhattan_csv(result, base / "manhattan.csv");
    export_summary_json(result, base / "summary.json");
    std::string all;
    for (const char* name : {"scan.tsv", "manhattan.csv", "summary.json"}) {
      std::ifstream in(base / name, std::ios::binary);
      all.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    outputs.push_back(std::move(all));
    std::filesystem::remove_all(base);
  }
  CHECK(outputs[0] == outputs[1]);
}

TEST_CASE("scan: missing policies") {
  const auto geno = parse_geno(
      "subject\t1:a\t1:b\t1:c\t1:d\t1:e\n"
      "s0\t0\t1\t2\t0\t1\n"
      "s1\tNA\t1\t0\t0\t1\n"
      "s2\t1\t0\t0\t1\t2\n"
      "s3\t2\t1\t0\t0\t0\n"
      "s4\t0\t0\t1\t1\t0\n"
      "s5\t1\t2\t0\t0\t1\n"
      "s6\t0\t1\t1\t0\t2\n"
      "s7\t2\t0\t0\t1\t1\n"
      "s8\t1\t1\t0\t2\t0\n"
      "s9\t0\t0\t2\t1\t1\n");
  Phenotype pheno;
  for (int i = 0; i < 10; ++i) {
    pheno.subject_ids.push_back("s" + std::to_string(i));
    pheno.status.push_back(i % 2);
  }
  ScanOptions options;
  options.width = 5;
  options.measures = {GeneticMeasure::SimpleMatching};
  options.missing = MissingPolicy::ModeImpute;
  const auto imputed = scan(geno, pheno, options);
  CHECK(imputed.windows[0].imputed == 1);
  CHECK(imputed.windows[0].dropped == 0);
  CHECK(std::isfinite(imputed.windows[0].p_values[0]));

  options.missing = MissingPolicy::DropSubject;
  const auto dropped = scan(geno, pheno, options);
  CHECK(dropped.windows[0].dropped == 1);
  CHECK(dropped.windows[0].imputed == 0);
  CHECK(std::isfinite(dropped.windows[0].p_values[0]));
}

TEST_CASE("scan: degenerate windows are flagged with NA") {
  // every subject identical: no variability at all
  std::string text = "subject\t1:a\t1:b\t1:c\t1:d\t1:e\n";
  for (int i = 0; i < 12; ++i) text += "s" + std::to_string(i) + "\t1\t0\t2\t1\t0\n";
  const auto geno = parse_geno(text);
  Phenotype pheno;
  for (int i = 0; i < 12; ++i) {
    pheno.subject_ids.push_back("s" + std::to_string(i));
    pheno.status.push_back(i % 2);
  }
  ScanOptions options;
  options.measures = {GeneticMeasure::Ibs};
  const auto result = scan(geno, pheno, options);
  CHECK(std::isnan(result.windows[0].p_values[0]));
  CHECK((result.windows[0].flags[0] & kFlagDegenerateNull) != 0);
}

TEST_CASE("scan: unknown phenotype subject and single-class errors") {
  Phenotype pheno;
  const auto geno = planted_cohort(5, 5, 6, 0, 0, 0.3, 0.3, 1, &pheno);
  Phenotype bad = pheno;
  bad.subject_ids[0] = "stranger";
  ScanOptions options;
  CHECK_THROWS_WITH_AS(scan(geno, bad, options), doctest::Contains("stranger"), DataError);
  Phenotype one_class = pheno;
  one_class.status.assign(one_class.status.size(), 1);
  CHECK_THROWS_WITH_AS(scan(geno, one_class, options),
                       doctest::Contains("cases and controls"), DataError);
}

TEST_CASE("exports: formatting contract") {
  ScanResult result;
  result.measures = {GeneticMeasure::Ibs};
  result.measure_names = {"ibs"};
  result.chromosome_names = {"7"};
  result.significance = 1e-7;
  WindowResult w1;
  w1.spec = {0, 3, 5};
  w1.p_values = {1e-7};
  w1.flags = {0};
  WindowResult w2;
  w2.spec = {0, 4, 5};
  w2.p_values = {std::numeric_limits<double>::quiet_NaN()};
  w2.flags = {kFlagDegenerateNull};
  result.windows = {w1, w2};

  const auto tmp = std::filesystem::temp_directory_path();
  export_tsv(result, tmp / "dn_fmt.tsv");
  export_manhattan_csv(result, tmp / "dn_fmt.csv");
  export_summary_json(result, tmp / "dn_fmt.json");

  std::ifstream tsv(tmp / "dn_fmt.tsv");
  std::string line, all;
  int rows = 0;
  bool saw_seven = false, saw_na = false;
  while (std::getline(tsv, line)) {
    if (rows++ == 0) continue;  // header
    if (line.find("\t7\t") != std::string::npos) saw_seven = true;  // -log10(1e-7) = 7
    if (line.find("NA\tNA") != std::string::npos) saw_na = true;
  }
  CHECK(rows - 1 == 2);  // windows x measures
  CHECK(saw_seven);
  CHECK(saw_na);

  std::ifstream csv(tmp / "dn_fmt.csv");
  int csv_rows = 0;
  while (std::getline(csv, line)) ++csv_rows;
  CHECK(csv_rows == 2);  // header + one row; the NA window is excluded

  std::ifstream js(tmp / "dn_fmt.json");
  all.assign(std::istreambuf_iterator<char>(js), std::istreambuf_iterator<char>());
  CHECK(all.find("\"significant\": 1") != std::string::npos);
  CHECK(all.find("\"na\": 1") != std::string::npos);
  for (const char* name : {"dn_fmt.tsv", "dn_fmt.csv", "dn_fmt.json"})
    std::filesystem::remove(tmp / name);
}

TEST_CASE("scan: planted signal is found by the top-ranked window") {
  Phenotype pheno;
  const int signal_start = 150;
  const auto geno =
      planted_cohort(30, 30, 300, signal_start, 5, 0.12, 0.5, 2026, &pheno);
  ScanOptions options;
  options.measures = {GeneticMeasure::Ibs};
  options.seed = 11;
  options.threads = 2;
  const auto result = scan(geno, pheno, options);
  CHECK(result.windows.size() == 296);
  std::size_t best = 0;
  double best_p = 2.0;
  for (std::size_t w = 0; w < result.windows.size(); ++w) {
    const double p = result.windows[w].p_values[0];
    if (!std::isnan(p) && p < best_p) {
      best_p = p;
      best = w;
    }
  }
  // the winning window overlaps the planted block
  CHECK(result.windows[best].spec.start + 5 > static_cast<std::size_t>(signal_start));
  CHECK(result.windows[best].spec.start < static_cast<std::size_t>(signal_start + 5));
  CHECK(best_p < 1e-4);
}

TEST_CASE("scan: monte carlo engine emits no zero p-values") {
  Phenotype pheno;
  const auto geno = planted_cohort(12, 12, 10, 2, 5, 0.1, 0.6, 8, &pheno);
  ScanOptions options;
  options.measures = {GeneticMeasure::Ibs};
  options.engine = Engine::MonteCarlo;
  options.n_pi = 2000;
  const auto result = scan(geno, pheno, options);
  for (const auto& w : result.windows) {
    const double p = w.p_values[0];
    if (std::isnan(p)) continue;
    CHECK(p >= 1.0 / options.n_pi);
    CHECK(p <= 1.0);
  }
}
