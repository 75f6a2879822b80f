#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distanova::gwas {

struct SnpRecord {
  std::string chromosome;
  std::string id;
};

// Subjects x SNPs minor-allele counts; -1 marks a missing call. Counts are
// stored per SNP (column-major) so sliding windows are contiguous.
struct GenotypeMatrix {
  std::vector<std::string> subjects;
  std::vector<SnpRecord> snps;
  std::vector<std::int8_t> counts;  // column-major: counts[snp * n + subject]
  // [first, last) SNP index per chromosome, in file order
  std::vector<std::pair<std::size_t, std::size_t>> chromosome_ranges;

  int n_subjects() const { return static_cast<int>(subjects.size()); }
  int n_snps() const { return static_cast<int>(snps.size()); }
  std::int8_t at(int subject, int snp) const {
    return counts[static_cast<std::size_t>(snp) * subjects.size() + subject];
  }
};

// Case/control status per subject id; ids must be a subset of the genotype
// subjects and both classes must be nonempty.
struct Phenotype {
  std::vector<std::string> subject_ids;
  std::vector<int> status;  // 0 control, 1 case
};

}  // namespace distanova::gwas
