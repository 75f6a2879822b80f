#include "distanova/gwas.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "distanova/dbf.hpp"
#include "distanova/parallel.hpp"
#include "distanova/permutation.hpp"
#include "distanova/rng.hpp"

namespace distanova::gwas {

namespace {

constexpr std::uint64_t kTagWindow = 0x77696e64ULL;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

[[noreturn]] void parse_error(const std::string& origin, std::size_t line_no,
                              const std::string& what) {
  throw DataError(origin + ":" + std::to_string(line_no) + ": " + what);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

GenotypeMatrix read_genotypes(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty genotype file");
  strip_cr(line);
  auto header = split_tabs(line);
  if (header.size() < 2 || header[0] != "subject")
    parse_error(origin, 1, "header must start with 'subject' followed by chr:snp_id columns");
  GenotypeMatrix geno;
  geno.snps.reserve(header.size() - 1);
  for (std::size_t k = 1; k < header.size(); ++k) {
    const auto colon = header[k].find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == header[k].size())
      parse_error(origin, 1, "SNP column '" + header[k] + "' is not chr:snp_id");
    geno.snps.push_back({header[k].substr(0, colon), header[k].substr(colon + 1)});
  }
  // chromosome runs must be contiguous in genome order
  std::unordered_set<std::string> seen;
  for (std::size_t k = 0; k < geno.snps.size(); ++k) {
    const auto& chrom = geno.snps[k].chromosome;
    if (k == 0 || chrom != geno.snps[k - 1].chromosome) {
      if (!seen.insert(chrom).second)
        parse_error(origin, 1, "chromosome " + chrom + " appears in two separate runs");
      geno.chromosome_ranges.emplace_back(k, k + 1);
    } else {
      geno.chromosome_ranges.back().second = k + 1;
    }
  }

  const std::size_t n_snps = geno.snps.size();
  std::vector<std::vector<std::int8_t>> rows;
  std::unordered_set<std::string> subject_seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != n_snps + 1)
      parse_error(origin, line_no,
                  "expected " + std::to_string(n_snps + 1) + " fields, got " +
                      std::to_string(fields.size()));
    if (!subject_seen.insert(fields[0]).second)
      parse_error(origin, line_no, "duplicate subject id '" + fields[0] + "'");
    geno.subjects.push_back(fields[0]);
    std::vector<std::int8_t> row(n_snps);
    for (std::size_t k = 0; k < n_snps; ++k) {
      const auto& tok = fields[k + 1];
      if (tok == "NA")
        row[k] = -1;
      else if (tok == "0" || tok == "1" || tok == "2")
        row[k] = static_cast<std::int8_t>(tok[0] - '0');
      else
        parse_error(origin, line_no, "token '" + tok + "' is not 0, 1, 2 or NA");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(origin + ": no subject rows");
  const std::size_t n = rows.size();
  geno.counts.resize(n * n_snps);
  for (std::size_t s = 0; s < n_snps; ++s)
    for (std::size_t i = 0; i < n; ++i) geno.counts[s * n + i] = rows[i][s];
  return geno;
}

GenotypeMatrix load_genotypes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open genotype file " + path.string());
  return read_genotypes(in, path.string());
}

Phenotype read_phenotype(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(origin + ": empty phenotype file");
  strip_cr(line);
  const auto header = split_tabs(line);
  if (header.size() != 2 || header[0] != "subject" || header[1] != "status")
    parse_error(origin, 1, "header must be 'subject<TAB>status'");
  Phenotype pheno;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) parse_error(origin, line_no, "expected 2 fields");
    if (!seen.insert(fields[0]).second)
      parse_error(origin, line_no, "duplicate subject id '" + fields[0] + "'");
    if (fields[1] != "0" && fields[1] != "1")
      parse_error(origin, line_no, "status must be 0 or 1");
    pheno.subject_ids.push_back(fields[0]);
    pheno.status.push_back(fields[1][0] - '0');
  }
  if (pheno.subject_ids.empty()) throw DataError(origin + ": no phenotype rows");
  return pheno;
}

Phenotype load_phenotype(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open phenotype file " + path.string());
  return read_phenotype(in, path.string());
}

void write_genotypes(const std::filesystem::path& path, const GenotypeMatrix& geno) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "subject";
  for (const auto& snp : geno.snps) out << '\t' << snp.chromosome << ':' << snp.id;
  out << '\n';
  for (int i = 0; i < geno.n_subjects(); ++i) {
    out << geno.subjects[i];
    for (int s = 0; s < geno.n_snps(); ++s) {
      const auto g = geno.at(i, s);
      if (g < 0)
        out << "\tNA";
      else
        out << '\t' << static_cast<char>('0' + g);
    }
    out << '\n';
  }
}

void write_phenotype(const std::filesystem::path& path, const Phenotype& pheno) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "subject\tstatus\n";
  for (std::size_t i = 0; i < pheno.subject_ids.size(); ++i)
    out << pheno.subject_ids[i] << '\t' << pheno.status[i] << '\n';
}

std::vector<WindowSpec> windows(const GenotypeMatrix& geno, int width) {
  if (width < 1) throw InvalidInput("windows: width must be >= 1");
  std::vector<WindowSpec> out;
  for (std::size_t c = 0; c < geno.chromosome_ranges.size(); ++c) {
    const auto [first, last] = geno.chromosome_ranges[c];
    if (last - first < static_cast<std::size_t>(width)) continue;
    for (std::size_t s = first; s + width <= last; ++s)
      out.push_back(WindowSpec{static_cast<int>(c), s, width});
  }
  return out;
}

std::uint64_t window_seed(std::uint64_t global_seed, int chromosome_index,
                          std::size_t start, std::size_t measure_index) {
  return mix_seed(global_seed, kTagWindow, static_cast<std::uint64_t>(chromosome_index),
                  static_cast<std::uint64_t>(start),
                  static_cast<std::uint64_t>(measure_index));
}

const char* measure_name(GeneticMeasure measure) {
  switch (measure) {
    case GeneticMeasure::Ibs: return "ibs";
    case GeneticMeasure::SimpleMatching: return "simple_matching";
    case GeneticMeasure::SokalSneath: return "sokal_sneath";
    case GeneticMeasure::RogersTanimoto1: return "rti";
    case GeneticMeasure::Hamman1: return "hamman1";
  }
  return "?";
}

std::optional<GeneticMeasure> measure_from_name(const std::string& name) {
  if (name == "ibs") return GeneticMeasure::Ibs;
  if (name == "simple_matching") return GeneticMeasure::SimpleMatching;
  if (name == "sokal_sneath") return GeneticMeasure::SokalSneath;
  if (name == "rti" || name == "rogers_tanimoto1") return GeneticMeasure::RogersTanimoto1;
  if (name == "hamman1") return GeneticMeasure::Hamman1;
  return std::nullopt;
}

namespace {

// Subjects of one window after the missing policy, compressed to distinct
// genotype profiles.
struct WindowData {
  std::vector<std::int8_t> profiles;      // R x width row-major
  std::vector<int> class_size;            // per profile
  std::vector<std::int32_t> class_of;     // kept-subject -> profile
  std::vector<int> kept;                  // indices into the cohort
  int imputed = 0;
  int dropped = 0;
};

// Window extraction: mode imputation replaces missing calls by the window's
// per-SNP modal count (ties toward the smaller count); drop-subject removes
// subjects with any missing call in the window.
WindowData extract_window(const GenotypeMatrix& geno, const std::vector<int>& cohort,
                          std::size_t start, int width, MissingPolicy policy) {
  WindowData wd;
  const int n_cohort = static_cast<int>(cohort.size());
  std::vector<std::int8_t> calls(static_cast<std::size_t>(n_cohort) * width);
  for (int k = 0; k < width; ++k) {
    const std::int8_t* column = geno.counts.data() +
                                (start + k) * static_cast<std::size_t>(geno.n_subjects());
    for (int i = 0; i < n_cohort; ++i)
      calls[static_cast<std::size_t>(i) * width + k] = column[cohort[i]];
  }
  if (policy == MissingPolicy::DropSubject) {
    for (int i = 0; i < n_cohort; ++i) {
      bool ok = true;
      for (int k = 0; k < width; ++k) ok = ok && calls[i * width + k] >= 0;
      if (ok)
        wd.kept.push_back(i);
      else
        ++wd.dropped;
    }
  } else {
    wd.kept.resize(n_cohort);
    std::iota(wd.kept.begin(), wd.kept.end(), 0);
    for (int k = 0; k < width; ++k) {
      int freq[3] = {0, 0, 0};
      for (int i = 0; i < n_cohort; ++i) {
        const auto g = calls[i * width + k];
        if (g >= 0) ++freq[g];
      }
      std::int8_t mode = 0;
      if (freq[1] > freq[mode]) mode = 1;
      if (freq[2] > freq[mode]) mode = 2;
      for (int i = 0; i < n_cohort; ++i)
        if (calls[i * width + k] < 0) {
          calls[i * width + k] = mode;
          ++wd.imputed;
        }
    }
  }
  // profile compression: base-3 keys over the window
  std::unordered_map<std::uint64_t, std::int32_t> ids;
  wd.class_of.reserve(wd.kept.size());
  for (const int i : wd.kept) {
    std::uint64_t key = 0;
    for (int k = 0; k < width; ++k) key = key * 3 + calls[i * width + k];
    auto [it, inserted] = ids.emplace(key, static_cast<std::int32_t>(ids.size()));
    if (inserted) {
      wd.class_size.push_back(0);
      for (int k = 0; k < width; ++k)
        wd.profiles.push_back(calls[i * width + k]);
    }
    wd.class_of.push_back(it->second);
    ++wd.class_size[it->second];
  }
  return wd;
}

// class-level squared distances for one measure (R x R)
std::vector<double> profile_sq_distances(const WindowData& wd, int width,
                                         GeneticMeasure measure) {
  const int r = static_cast<int>(wd.class_size.size());
  std::vector<double> d2(static_cast<std::size_t>(r) * r, 0.0);
  auto row = [&](int c) {
    return std::span<const std::int8_t>(wd.profiles.data() + c * width,
                                        static_cast<std::size_t>(width));
  };
  if (measure == GeneticMeasure::Hamman1) {
    // cohort-relative: the min/max run over subject pairs, i.e. profile
    // pairs weighted by multiplicity (identical-profile pairs score s = 1)
    std::vector<double> s_hi(static_cast<std::size_t>(r) * r, 1.0);
    double s_min = std::numeric_limits<double>::infinity();
    bool any_within = false;
    for (int a = 0; a < r; ++a) {
      if (wd.class_size[a] > 1) any_within = true;
      for (int b = a + 1; b < r; ++b) {
        const auto mc = match_counts(row(a), row(b));
        const double s = static_cast<double>(mc.m_plus - mc.m_minus) / mc.p;
        s_hi[a * r + b] = s_hi[b * r + a] = s;
        s_min = std::min(s_min, s);
      }
    }
    if (any_within) s_min = std::min(s_min, 1.0);
    if (r == 1) return d2;  // single profile: all pairs identical
    const double shift = std::abs(s_min);
    double s_max = any_within ? 1.0 + shift : 0.0;
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) s_max = std::max(s_max, s_hi[a * r + b] + shift);
    if (s_max <= 0.0) return d2;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) {
        if (a == b) continue;
        const double d = 1.0 - (s_hi[a * r + b] + shift) / s_max;
        d2[a * r + b] = d * d;
      }
    return d2;
  }
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      const double d = genetic_distance(row(a), row(b), measure);
      d2[a * r + b] = d2[b * r + a] = d * d;
    }
  return d2;
}

}  // namespace

ScanResult scan(const GenotypeMatrix& geno, const Phenotype& pheno,
                const ScanOptions& options) {
  if (options.measures.empty()) throw InvalidInput("scan: no measures selected");
  if (options.width < 1) throw InvalidInput("scan: width must be >= 1");

  // cohort = phenotype subjects in genotype file order
  std::unordered_map<std::string, int> geno_index;
  for (int i = 0; i < geno.n_subjects(); ++i) geno_index.emplace(geno.subjects[i], i);
  std::unordered_map<std::string, int> status_of;
  for (std::size_t k = 0; k < pheno.subject_ids.size(); ++k) {
    if (!geno_index.count(pheno.subject_ids[k]))
      throw DataError("phenotype subject '" + pheno.subject_ids[k] +
                      "' is absent from the genotype file");
    status_of.emplace(pheno.subject_ids[k], pheno.status[k]);
  }
  std::vector<int> cohort;
  std::vector<int> labels;
  for (int i = 0; i < geno.n_subjects(); ++i) {
    const auto it = status_of.find(geno.subjects[i]);
    if (it == status_of.end()) continue;
    cohort.push_back(i);
    labels.push_back(it->second);
  }
  int n_cases = 0;
  for (int s : labels) n_cases += s;
  if (n_cases == 0 || n_cases == static_cast<int>(labels.size()))
    throw DataError("phenotype must contain both cases and controls");

  ScanResult result;
  result.measures = options.measures;
  for (auto m : options.measures) result.measure_names.emplace_back(measure_name(m));
  result.significance = options.significance;
  for (const auto& range : geno.chromosome_ranges)
    result.chromosome_names.push_back(geno.snps[range.first].chromosome);
  for (std::size_t c = 0; c < geno.chromosome_ranges.size(); ++c) {
    const auto [first, last] = geno.chromosome_ranges[c];
    if (last - first < static_cast<std::size_t>(options.width))
      result.warnings.push_back("chromosome " + result.chromosome_names[c] +
                                " is shorter than the window width; no windows");
  }

  const auto specs = windows(geno, options.width);
  result.windows.resize(specs.size());
  const std::size_t n_measures = options.measures.size();

  parallel_chunks(
      specs.size(), 4, options.threads,
      [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t w = begin; w < end; ++w) {
          const auto& spec = specs[w];
          WindowResult& wr = result.windows[w];
          wr.spec = spec;
          wr.p_values.assign(n_measures, std::numeric_limits<double>::quiet_NaN());
          wr.flags.assign(n_measures, 0);
          const auto wd = extract_window(geno, cohort, spec.start, spec.width,
                                         options.missing);
          wr.imputed = wd.imputed;
          wr.dropped = wd.dropped;
          // class sizes per status after the missing policy
          std::vector<int> kept_labels;
          kept_labels.reserve(wd.kept.size());
          int kept_cases = 0;
          for (const int i : wd.kept) {
            kept_labels.push_back(labels[i]);
            kept_cases += labels[i];
          }
          const int kept_controls = static_cast<int>(kept_labels.size()) - kept_cases;
          if (kept_cases < 2 || kept_controls < 2 ||
              static_cast<int>(kept_labels.size()) < 7) {
            for (std::size_t m = 0; m < n_measures; ++m)
              wr.flags[m] |= kFlagTooFewSubjects;
            continue;
          }
          const GroupAssignment groups(kept_labels);
          for (std::size_t m = 0; m < n_measures; ++m) {
            const auto d2 = profile_sq_distances(wd, spec.width, options.measures[m]);
            auto cg = detail::ClassGower::from_squared_distances(d2, wd.class_size,
                                                                 wd.class_of);
            const detail::GroupedBSampler sampler(std::move(cg), groups);
            const std::uint64_t seed =
                window_seed(options.seed, spec.chromosome_index, spec.start, m);
            if (options.engine == Engine::MonteCarlo) {
              permutation::PermutationPlan plan;
              plan.n_pi = options.n_pi;
              plan.seed = seed;
              const double total = sampler.total();
              const double between = sampler.observed_b();
              const double within = total - between;
              if (total <= 0.0) {
                wr.flags[m] |= kFlagDegenerateNull;
                continue;
              }
              if (within <= 1e-12 * total) {
                wr.flags[m] |= kFlagDegenerateWithin;
                wr.p_values[m] = 0.0;
                continue;
              }
              const auto f_values = perm_F_values(sampler, plan);
              wr.p_values[m] = permutation::perm_pvalue(f_values[0], f_values);
              continue;
            }
            DbfOptions opt;
            opt.skew_draws = options.skew_draws;
            opt.seed = seed;
            auto outcome = run_dbf_test(sampler, groups, opt);
            if (options.refine && outcome.status == DbfStatus::Ok &&
                outcome.p_value < options.refine_threshold) {
              opt.skew_draws = options.refine_draws;
              outcome = run_dbf_test(sampler, groups, opt);
              wr.flags[m] |= kFlagRefined;
            }
            switch (outcome.status) {
              case DbfStatus::Ok:
                wr.p_values[m] = outcome.p_value;
                break;
              case DbfStatus::DegenerateWithin:
                wr.flags[m] |= kFlagDegenerateWithin;
                wr.p_values[m] = 0.0;
                break;
              case DbfStatus::DegenerateNull:
                wr.flags[m] |= kFlagDegenerateNull;
                break;
            }
          }
        }
      });
  return result;
}

namespace {

std::string flags_text(std::uint8_t flags) {
  if (flags == 0) return "-";
  std::string out;
  const auto append = [&](const char* name) {
    if (!out.empty()) out += '+';
    out += name;
  };
  if (flags & kFlagDegenerateWithin) append("degenerate_within");
  if (flags & kFlagDegenerateNull) append("degenerate_null");
  if (flags & kFlagTooFewSubjects) append("too_few_subjects");
  if (flags & kFlagRefined) append("refined");
  return out;
}

}  // namespace

void export_tsv(const ScanResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "chromosome\tstart_snp\tmeasure\tp_value\tneg_log10_p\tflags\timputed\tdropped\n";
  char buf[128];
  for (const auto& wr : result.windows) {
    const auto& chrom = result.chromosome_names[wr.spec.chromosome_index];
    for (std::size_t m = 0; m < result.measure_names.size(); ++m) {
      out << chrom << '\t' << wr.spec.start << '\t' << result.measure_names[m] << '\t';
      const double p = wr.p_values[m];
      if (std::isnan(p)) {
        out << "NA\tNA";
      } else if (p == 0.0) {
        out << "0\tinf";
      } else {
        std::snprintf(buf, sizeof buf, "%.8g\t%.8g", p, -std::log10(p));
        out << buf;
      }
      out << '\t' << flags_text(wr.flags[m]) << '\t' << wr.imputed << '\t' << wr.dropped
          << '\n';
    }
  }
}

void export_manhattan_csv(const ScanResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "window_index,chromosome,parity,measure,neg_log10_p,threshold\n";
  char buf[160];
  const double threshold = -std::log10(result.significance);
  std::size_t index = 0;
  for (const auto& wr : result.windows) {
    for (std::size_t m = 0; m < result.measure_names.size(); ++m) {
      const double p = wr.p_values[m];
      if (std::isnan(p) || p <= 0.0) continue;  // NA and divergent rows are excluded
      std::snprintf(buf, sizeof buf, "%zu,%s,%d,%s,%.8g,%.8g\n", index,
                    result.chromosome_names[wr.spec.chromosome_index].c_str(),
                    wr.spec.chromosome_index % 2, result.measure_names[m].c_str(),
                    -std::log10(p), threshold);
      out << buf;
    }
    ++index;
  }
}

void export_summary_json(const ScanResult& result, const std::filesystem::path& path) {
  nlohmann::json summary;
  summary["windows"] = result.windows.size();
  summary["significance_threshold"] = result.significance;
  summary["warnings"] = result.warnings;
  nlohmann::json per_measure = nlohmann::json::object();
  for (std::size_t m = 0; m < result.measure_names.size(); ++m) {
    std::size_t significant = 0, degenerate = 0, na = 0;
    for (const auto& wr : result.windows) {
      const double p = wr.p_values[m];
      if (std::isnan(p)) {
        ++na;
        continue;
      }
      if (wr.flags[m] & (kFlagDegenerateWithin | kFlagDegenerateNull)) ++degenerate;
      if (p <= result.significance) ++significant;
    }
    per_measure[result.measure_names[m]] = {
        {"significant", significant}, {"degenerate", degenerate}, {"na", na}};
  }
  summary["measures"] = per_measure;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << summary.dump(2) << '\n';
}

}  // namespace distanova::gwas
