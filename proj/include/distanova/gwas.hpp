#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "distanova/distances.hpp"
#include "distanova/gwas_types.hpp"

namespace distanova::gwas {

// TSV loaders; see README for the exact formats. Malformed input raises
// DataError with the offending line number.
GenotypeMatrix load_genotypes(const std::filesystem::path& path);
GenotypeMatrix read_genotypes(std::istream& in, const std::string& origin);
Phenotype load_phenotype(const std::filesystem::path& path);
Phenotype read_phenotype(std::istream& in, const std::string& origin);
void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& geno);
void write_phenotype(const std::filesystem::path& path, const Phenotype& pheno);

struct WindowSpec {
  int chromosome_index = 0;
  std::size_t start = 0;  // global SNP index of the first SNP
  int width = 0;
};

// All contiguous stride-1 windows per chromosome (M_c - P + 1 each);
// chromosomes shorter than the width contribute none.
std::vector<WindowSpec> windows(const GenotypeMatrix& geno, int width);

enum class Engine { Approx, MonteCarlo };
enum class MissingPolicy { ModeImpute, DropSubject };

struct ScanOptions {
  int width = 5;
  std::vector<GeneticMeasure> measures{GeneticMeasure::Ibs};
  Engine engine = Engine::Approx;
  MissingPolicy missing = MissingPolicy::ModeImpute;
  long n_pi = 10000;        // Monte Carlo engine permutation budget
  long skew_draws = 10000;  // approx engine skewness draws
  std::uint64_t seed = 0;
  int threads = 1;
  // two-stage refinement: windows below the threshold are recomputed with
  // the larger skewness budget
  bool refine = false;
  double refine_threshold = 1e-5;
  long refine_draws = 100000;
  double significance = 1e-7;
};

enum WindowFlag : std::uint8_t {
  kFlagDegenerateWithin = 1,   // W = 0, B > 0: p = 0 by convention
  kFlagDegenerateNull = 2,     // no variability or point-mass null: p = NA
  kFlagTooFewSubjects = 4,     // < 2 subjects per class after missing policy
  kFlagRefined = 8,
};

struct WindowResult {
  WindowSpec spec;
  // per measure, aligned with ScanOptions::measures; NaN encodes NA
  std::vector<double> p_values;
  std::vector<std::uint8_t> flags;
  int imputed = 0;
  int dropped = 0;
};

struct ScanResult {
  std::vector<GeneticMeasure> measures;
  std::vector<std::string> measure_names;
  std::vector<WindowResult> windows;  // genome order
  double significance = 1e-7;
  std::vector<std::string> chromosome_names;
  std::vector<std::string> warnings;
};

ScanResult scan(const GenotypeMatrix& geno, const Phenotype& pheno,
                const ScanOptions& options);

// scan.tsv: one row per (window, measure); manhattan.csv: cumulative window
// index, -log10(p), chromosome parity and the threshold line; summary.json:
// significant-window counts per measure.
void export_tsv(const ScanResult& result, const std::filesystem::path& path);
void export_manhattan_csv(const ScanResult& result, const std::filesystem::path& path);
void export_summary_json(const ScanResult& result, const std::filesystem::path& path);

// Seed stream of one (window, measure) work item; exposed so single-window
// results can be reproduced outside a scan.
std::uint64_t window_seed(std::uint64_t global_seed, int chromosome_index,
                          std::size_t start, std::size_t measure_index);

const char* measure_name(GeneticMeasure measure);
std::optional<GeneticMeasure> measure_from_name(const std::string& name);

}  // namespace distanova::gwas
