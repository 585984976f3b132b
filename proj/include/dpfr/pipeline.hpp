// Copyright 2026 The dpfr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <chrono>

#include "dpfr/analysis.hpp"
#include "dpfr/distance.hpp"
#include "dpfr/rerank.hpp"
#include "dpfr/synth.hpp"

namespace dpfr {

inline const char* version() { return "0.1.0"; }

// ---------------------------------------------------------------------------
// Tabular artifacts

struct EvalMatrix {
  std::vector<std::string> runs;
  std::vector<Measure> measures;
  int k = 10;
  std::vector<std::vector<double>> values;  // [run][measure]

  double at(const std::string& run, Measure m) const {
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (runs[r] == run) {
        for (std::size_t c = 0; c < measures.size(); ++c) {
          if (measures[c] == m) {
            return values[r][c];
          }
        }
      }
    }
    throw Error("eval matrix has no entry for run '" + run + "'");
  }
};

inline void write_eval_csv(const EvalMatrix& em, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out << "run";
  for (Measure m : em.measures) {
    out << ',' << measure_name(m) << '@' << em.k;
  }
  out << '\n';
  for (std::size_t r = 0; r < em.runs.size(); ++r) {
    out << em.runs[r];
    for (double v : em.values[r]) {
      out << ',' << fmt_double(v);
    }
    out << '\n';
  }
}

inline EvalMatrix read_eval_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path);
  }
  EvalMatrix em;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("empty eval csv: " + path);
  }
  auto header = split_fields(line, ',');
  for (std::size_t c = 1; c < header.size(); ++c) {
    auto at = header[c].rfind('@');
    if (at == std::string_view::npos) {
      throw Error("bad eval csv header column: " + std::string(header[c]));
    }
    em.measures.push_back(parse_measure(header[c].substr(0, at)));
    em.k = static_cast<int>(*parse_int(header[c].substr(at + 1)));
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto f = split_fields(line, ',');
    if (f.size() != header.size()) {
      throw Error("bad eval csv row: " + line);
    }
    em.runs.push_back(std::string(f[0]));
    std::vector<double> row;
    for (std::size_t c = 1; c < f.size(); ++c) {
      row.push_back(*parse_double(f[c]));
    }
    em.values.push_back(std::move(row));
  }
  return em;
}

struct MeasurePair {
  Measure rel;
  Measure fair;

  std::string name() const {
    return std::string(measure_name(rel)) + '-' + measure_name(fair);
  }
};

inline MeasurePair parse_pair(std::string_view s) {
  auto dash = s.find('-');
  // fairness names may themselves contain '-' (II-F); the rel name never does
  if (dash == std::string_view::npos) {
    throw Error("bad measure pair: " + std::string(s));
  }
  return {parse_measure(s.substr(0, dash)), parse_measure(s.substr(dash + 1))};
}

inline std::vector<MeasurePair> cross_pairs(const std::vector<Measure>& rels,
                                            const std::vector<Measure>& fairs) {
  std::vector<MeasurePair> out;
  for (Measure r : rels) {
    for (Measure f : fairs) {
      out.push_back({r, f});
    }
  }
  return out;
}

struct DpfrMatrix {
  std::vector<std::string> runs;
  std::vector<MeasurePair> pairs;
  std::vector<std::vector<double>> values;  // [run][pair]
};

inline void write_dpfr_csv(const DpfrMatrix& dm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path);
  }
  out << "run";
  for (const auto& p : dm.pairs) {
    out << ',' << p.name();
  }
  out << '\n';
  for (std::size_t r = 0; r < dm.runs.size(); ++r) {
    out << dm.runs[r];
    for (double v : dm.values[r]) {
      out << ',' << fmt_double(v);
    }
    out << '\n';
  }
}

inline DpfrMatrix read_dpfr_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path);
  }
  DpfrMatrix dm;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("empty csv: " + path);
  }
  auto header = split_fields(line, ',');
  for (std::size_t c = 1; c < header.size(); ++c) {
    dm.pairs.push_back(parse_pair(header[c]));
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto f = split_fields(line, ',');
    dm.runs.push_back(std::string(f[0]));
    std::vector<double> row;
    for (std::size_t c = 1; c < f.size(); ++c) {
      row.push_back(*parse_double(f[c]));
    }
    dm.values.push_back(std::move(row));
  }
  return dm;
}

// ---------------------------------------------------------------------------
// Stage outputs

inline EvalMatrix evaluate_runs(const std::vector<RunTable>& runs,
                                const SplitDataset& split, int k,
                                const std::vector<Measure>& measures,
                                int threads = 1) {
  EvalMatrix em;
  em.k = k;
  em.measures = measures;
  for (const auto& run : runs) {
    em.runs.push_back(run.tag);
    std::vector<double> row;
    std::optional<ExposureVector> ev;
    for (Measure m : measures) {
      if (is_rel(m)) {
        row.push_back(rel_score(m, run, split, k, threads));
      } else if (is_fair(m)) {
        if (!ev) {
          ev = exposure(run, k, threads);
        }
        row.push_back(fair_score(m, *ev));
      } else {
        row.push_back(joint_score(m, run, split, k));
      }
    }
    em.values.push_back(std::move(row));
  }
  return em;
}

struct PfStageResult {
  PfTrace trace;
  std::vector<ParetoFrontier> frontiers;  // one per requested pair
  std::vector<MeasurePair> pairs;
  double wall_ms = 0.0;
};

inline PfStageResult generate_pf(const SplitDataset& split, int k,
                                 int points,  // 0 = full
                                 const std::vector<Measure>& measures) {
  std::vector<Measure> rels, fairs;
  for (Measure m : measures) {
    if (is_rel(m)) {
      rels.push_back(m);
    } else if (is_fair(m)) {
      fairs.push_back(m);
    }
  }
  if (rels.empty() || fairs.empty()) {
    throw Error("frontier generation needs at least one relevance and one "
                "fairness measure");
  }
  std::vector<Measure> used = rels;
  used.insert(used.end(), fairs.begin(), fairs.end());

  auto t0 = std::chrono::steady_clock::now();
  CheckpointPlan plan = CheckpointPlan::every_step();
  if (points > 0) {
    RecState st = oracle(split, k);
    plan = plan_checkpoints(state_exposure(st), k,
                            static_cast<int>(st.users.size()),
                            split.num_items(), points);
  }
  PfStageResult res;
  res.trace = oracle_to_fair(split, k, plan, used);
  res.pairs = cross_pairs(rels, fairs);
  for (const auto& pr : res.pairs) {
    res.frontiers.push_back(
        build_frontier(pf_points(res.trace, pr.rel, pr.fair), pr.rel, pr.fair));
  }
  auto t1 = std::chrono::steady_clock::now();
  res.wall_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  return res;
}

inline void write_pf_outputs(const PfStageResult& res, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& pr : res.pairs) {
    std::string path = dir + "/pf_" + std::string(measure_name(pr.rel)) + '_' +
                       measure_name(pr.fair) + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw Error("cannot write " + path);
    }
    out << "step,rel,fair\n";
    for (const auto& rec : res.trace.records) {
      out << rec.step << ',' << fmt_double(rec.values.at(pr.rel)) << ','
          << fmt_double(rec.values.at(pr.fair)) << '\n';
    }
  }
  // Metadata is plain text (it carries wall-clock, which must not perturb the
  // reproducible CSV set).
  std::ofstream meta(dir + "/pf_meta.txt", std::ios::binary);
  meta << "points\t" << res.trace.records.size() << '\n';
  meta << "replacements\t" << res.trace.replacements << '\n';
  meta << "phase1\t" << res.trace.phase1 << '\n';
  meta << "phase2\t" << res.trace.phase2 << '\n';
  meta << "wall_ms\t" << fmt_double(res.wall_ms) << '\n';
  for (std::size_t i = 0; i < res.pairs.size(); ++i) {
    const auto& pf = res.frontiers[i];
    meta << "pair\t" << res.pairs[i].name() << "\tgradient\t"
         << (pf.gradient ? fmt_double(*pf.gradient) : std::string("undefined"))
         << "\tfit\t" << (pf.fit ? 1 : 0) << '\n';
  }
}

// Reads the per-pair point files back into frontiers.
inline std::vector<ParetoFrontier> read_pf_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto name = e.path().filename().string();
    if (name.rfind("pf_", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ParetoFrontier> out;
  for (const auto& path : files) {
    std::string stem = fs::path(path).stem().string().substr(3);
    auto us = stem.find('_');
    Measure rel_m = parse_measure(stem.substr(0, us));
    Measure fair_m = parse_measure(stem.substr(us + 1));
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<ScorePoint> pts;
    while (std::getline(in, line)) {
      if (line.empty()) {
        continue;
      }
      auto f = split_fields(line, ',');
      if (f.size() != 3) {
        throw Error("bad frontier row in " + path + ": " + line);
      }
      pts.push_back({*parse_double(f[1]), *parse_double(f[2]),
                     std::string(f[0])});
    }
    out.push_back(build_frontier(pts, rel_m, fair_m));
  }
  return out;
}

// Distance matrix of every run against the alpha reference point of every fit
// frontier.
inline DpfrMatrix dpfr_matrix(const EvalMatrix& em,
                              const std::vector<ParetoFrontier>& frontiers,
                              double alpha) {
  DpfrMatrix dm;
  dm.runs = em.runs;
  for (const auto& pf : frontiers) {
    if (!pf.fit) {
      continue;
    }
    dm.pairs.push_back({pf.rel_measure, pf.fair_measure});
  }
  dm.values.assign(em.runs.size(), {});
  for (const auto& pf : frontiers) {
    if (!pf.fit) {
      continue;
    }
    auto ref = reference_point(pf, alpha);
    for (std::size_t r = 0; r < em.runs.size(); ++r) {
      ScorePoint p;
      p.rel = em.at(em.runs[r], pf.rel_measure);
      p.fair = em.at(em.runs[r], pf.fair_measure);
      p.tag = em.runs[r];
      dm.values[r].push_back(dpfr_score(p, ref, pf).value);
    }
  }
  return dm;
}

inline void write_best_per_pair(const DpfrMatrix& dm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "pair,best_run,value\n";
  for (std::size_t c = 0; c < dm.pairs.size(); ++c) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < dm.runs.size(); ++r) {
      if (dm.values[r][c] < dm.values[best][c]) {
        best = r;
      }
    }
    out << dm.pairs[c].name() << ',' << dm.runs[best] << ','
        << fmt_double(dm.values[best][c]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Agreement analysis

struct AnalysisResult {
  std::vector<std::string> evaluators;      // measures and per-pair averages
  std::vector<MeasurePair> pairs;           // distance evaluators (columns)
  std::vector<std::vector<std::optional<double>>> tau;  // [evaluator][pair]
  DisagreementReport disagreement;
  std::vector<MeasurePair> disagreement_pairs;
};

inline AnalysisResult analyze(const EvalMatrix& em, const DpfrMatrix& dm) {
  AnalysisResult ar;
  ar.pairs = dm.pairs;

  std::vector<RunRanking> baselines;
  for (std::size_t c = 0; c < em.measures.size(); ++c) {
    RunRanking rr;
    rr.evaluator = measure_name(em.measures[c]);
    rr.run_tags = em.runs;
    rr.higher_is_better = higher_better(em.measures[c]);
    for (std::size_t r = 0; r < em.runs.size(); ++r) {
      rr.scores.push_back(em.values[r][c]);
    }
    baselines.push_back(std::move(rr));
  }
  for (const auto& pr : dm.pairs) {
    RunRanking rr;
    rr.evaluator = "avg:" + pr.name();
    rr.run_tags = em.runs;
    rr.higher_is_better = true;
    for (const auto& run : em.runs) {
      rr.scores.push_back(
          avg_baseline(em.at(run, pr.rel), em.at(run, pr.fair), pr.fair));
    }
    baselines.push_back(std::move(rr));
  }

  std::vector<RunRanking> dpfr_rankings;
  for (std::size_t c = 0; c < dm.pairs.size(); ++c) {
    RunRanking rr;
    rr.evaluator = "dpfr:" + dm.pairs[c].name();
    rr.run_tags = dm.runs;
    rr.higher_is_better = false;
    for (std::size_t r = 0; r < dm.runs.size(); ++r) {
      rr.scores.push_back(dm.values[r][c]);
    }
    dpfr_rankings.push_back(std::move(rr));
  }

  for (const auto& base : baselines) {
    ar.evaluators.push_back(base.evaluator);
    std::vector<std::optional<double>> row;
    for (const auto& dr : dpfr_rankings) {
      row.push_back(kendall_tau(base, dr));
    }
    ar.tau.push_back(std::move(row));
  }

  std::vector<PairScores> ps;
  for (std::size_t c = 0; c < dm.pairs.size(); ++c) {
    PairScores p;
    p.rel_measure = dm.pairs[c].rel;
    p.fair_measure = dm.pairs[c].fair;
    for (std::size_t r = 0; r < dm.runs.size(); ++r) {
      p.dpfr.push_back(dm.values[r][c]);
      p.avg.push_back(avg_baseline(em.at(dm.runs[r], p.rel_measure),
                                   em.at(dm.runs[r], p.fair_measure),
                                   p.fair_measure));
    }
    ps.push_back(std::move(p));
  }
  ar.disagreement = best_model_disagreement(ps);
  ar.disagreement_pairs = dm.pairs;
  return ar;
}

inline void write_analysis(const AnalysisResult& ar, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(dir + "/tau.csv", std::ios::binary);
    out << "evaluator";
    for (const auto& p : ar.pairs) {
      out << ',' << p.name();
    }
    out << '\n';
    for (std::size_t r = 0; r < ar.evaluators.size(); ++r) {
      out << ar.evaluators[r];
      for (const auto& t : ar.tau[r]) {
        out << ',' << (t ? fmt_double(*t) : std::string("undefined"));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir + "/equivalence.csv", std::ios::binary);
    out << "evaluator";
    for (const auto& p : ar.pairs) {
      out << ',' << p.name();
    }
    out << '\n';
    for (std::size_t r = 0; r < ar.evaluators.size(); ++r) {
      out << ar.evaluators[r];
      for (const auto& t : ar.tau[r]) {
        out << ',' << (equivalence_flag(t) ? 1 : 0);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir + "/disagreement.csv", std::ios::binary);
    out << "pair,disagree\n";
    for (std::size_t i = 0; i < ar.disagreement_pairs.size(); ++i) {
      out << ar.disagreement_pairs[i].name() << ','
          << ar.disagreement.flags[i] << '\n';
    }
    out << "set_based_pct," << fmt_double(ar.disagreement.pct_set) << '\n';
    out << "rank_based_pct," << fmt_double(ar.disagreement.pct_rank) << '\n';
    out << "all_pct," << fmt_double(ar.disagreement.pct_all) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
  std::string source = "file";  // file | synth
  std::string dataset;
  PreprocessConfig preprocess;
  SplitMode split_mode = SplitMode::Random;
  SplitRatio ratio;
  std::uint64_t seed = 42;
  SynthSpec synth = SynthSpec::tiny();
  std::string synth_preset = "tiny";
  std::vector<std::string> run_files;
  std::vector<std::string> rerankers;  // subset of {gs, cm, bc}
  int k = 10;
  int kprime = 25;
  double alpha = 0.5;
  double beta = 0.05;
  double replace_frac = 0.25;
  std::vector<Measure> measures = all_measures();
  int pf_points = 0;  // 0 = full
  int threads = 1;
  std::string out = "out";
};

inline void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto as_int = [&](const std::string& v) {
    auto p = parse_int(v);
    if (!p) {
      throw Error("config: bad integer for " + key + ": " + v);
    }
    return *p;
  };
  auto as_double = [&](const std::string& v) {
    auto p = parse_double(v);
    if (!p) {
      throw Error("config: bad number for " + key + ": " + v);
    }
    return *p;
  };
  if (key == "source") {
    cfg.source = value;
  } else if (key == "dataset") {
    cfg.dataset = value;
  } else if (key == "min_rating") {
    cfg.preprocess.min_rating = as_double(value);
  } else if (key == "max_user_interactions") {
    cfg.preprocess.max_user_interactions = as_int(value);
  } else if (key == "core") {
    cfg.preprocess.core = static_cast<int>(as_int(value));
  } else if (key == "split_mode") {
    if (value == "temporal") {
      cfg.split_mode = SplitMode::Temporal;
    } else if (value == "random") {
      cfg.split_mode = SplitMode::Random;
    } else {
      throw Error("config: split_mode must be temporal or random");
    }
  } else if (key == "ratio") {
    auto f = split_fields(value, ',');
    if (f.size() != 3) {
      throw Error("config: ratio needs three comma-separated values");
    }
    cfg.ratio = {*parse_double(f[0]), *parse_double(f[1]), *parse_double(f[2])};
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(as_int(value));
    cfg.synth.seed = cfg.seed;
  } else if (key == "synth_preset") {
    cfg.synth_preset = value;
    std::uint64_t keep = cfg.synth.seed;
    if (value == "tiny") {
      cfg.synth = SynthSpec::tiny(keep);
    } else if (value == "mid") {
      cfg.synth = SynthSpec::mid(keep);
    } else {
      throw Error("config: synth_preset must be tiny or mid");
    }
  } else if (key == "synth_users") {
    cfg.synth.m = static_cast<int>(as_int(value));
  } else if (key == "synth_items") {
    cfg.synth.n = static_cast<int>(as_int(value));
  } else if (key == "synth_skew") {
    cfg.synth.skew = as_double(value);
  } else if (key == "synth_runs") {
    cfg.synth.num_runs = static_cast<int>(as_int(value));
  } else if (key == "synth_list_len") {
    cfg.synth.list_len = static_cast<int>(as_int(value));
  } else if (key == "runs") {
    cfg.run_files.clear();
    for (auto part : split_fields(value, ',')) {
      if (!part.empty()) {
        cfg.run_files.push_back(std::string(part));
      }
    }
  } else if (key == "rerank") {
    cfg.rerankers.clear();
    if (value != "none") {
      for (auto part : split_fields(value, ',')) {
        std::string p(part);
        if (p != "gs" && p != "cm" && p != "bc") {
          throw Error("config: rerank must be none or a subset of gs,cm,bc");
        }
        cfg.rerankers.push_back(p);
      }
    }
  } else if (key == "k") {
    cfg.k = static_cast<int>(as_int(value));
  } else if (key == "kprime") {
    cfg.kprime = static_cast<int>(as_int(value));
  } else if (key == "alpha") {
    cfg.alpha = as_double(value);
  } else if (key == "beta") {
    cfg.beta = as_double(value);
  } else if (key == "replace_frac") {
    cfg.replace_frac = as_double(value);
  } else if (key == "measures") {
    cfg.measures.clear();
    if (value == "all") {
      cfg.measures = all_measures();
    } else {
      for (auto part : split_fields(value, ',')) {
        cfg.measures.push_back(parse_measure(part));
      }
    }
  } else if (key == "pf_points") {
    cfg.pf_points = value == "full" ? 0 : static_cast<int>(as_int(value));
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(as_int(value));
  } else if (key == "out") {
    cfg.out = value;
  } else {
    throw Error("config: unknown key: " + key);
  }
}

// Flat key = value lines; '#' starts a comment.
inline PipelineConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open config: " + path);
  }
  PipelineConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) {
      apply_config_entry(cfg, key, value);
    }
  }
  return cfg;
}

struct ManifestEntry {
  std::string path;
  std::string hash;
  std::uintmax_t bytes = 0;
  std::string stage;
  double ms = 0.0;
};

struct PipelineResult {
  std::vector<ManifestEntry> manifest;
  std::string out_dir;
};

namespace detail {

class StageClock {
public:
  StageClock() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0_)
        .count();
  }

private:
  std::chrono::steady_clock::time_point t0_;
};

inline void add_output(std::vector<ManifestEntry>& manifest,
                       const std::string& path, const std::string& stage,
                       double ms) {
  ManifestEntry e;
  e.path = path;
  e.hash = file_hash_hex(path);
  e.bytes = std::filesystem::file_size(path);
  e.stage = stage;
  e.ms = ms;
  manifest.push_back(std::move(e));
}

inline void write_manifest(const std::vector<ManifestEntry>& manifest,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  out << "# tool_version " << version() << '\n';
  out << "path\thash\tbytes\tstage\tms\n";
  for (const auto& e : manifest) {
    out << e.path << '\t' << e.hash << '\t' << e.bytes << '\t' << e.stage
        << '\t' << fmt_double(e.ms) << '\n';
  }
}

}  // namespace detail

// Runs preprocess → split → [rerank] → eval → pf → dpfr → analyze, writing
// every stage artifact under cfg.out and a manifest of hashes and timings.
// Stage outputs do not embed timestamps, so identical inputs and config give
// byte-identical CSVs.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  if (cfg.k > cfg.kprime) {
    throw Error("config: k must not exceed kprime");
  }
  if (cfg.alpha < 0 || cfg.alpha > 1) {
    throw Error("config: alpha must lie in [0, 1]");
  }
  if (cfg.pf_points != 0 && cfg.pf_points < 2) {
    throw Error("config: pf_points must be 'full' or at least 2");
  }
  PipelineResult result;
  result.out_dir = cfg.out;
  fs::create_directories(cfg.out);
  std::string manifest_path = cfg.out + "/manifest.txt";
  auto checkpoint = [&]() {
    detail::write_manifest(result.manifest, manifest_path);
  };

  // Stage: dataset + split.
  SplitDataset split_data;
  std::vector<RunTable> runs;
  {
    detail::StageClock clock;
    std::string split_dir = cfg.out + "/split";
    if (cfg.source == "synth") {
      SynthInstance inst = generate(cfg.synth);
      split_data = std::move(inst.split);
      runs = std::move(inst.runs);
      write_split(split_data, split_dir);
      fs::create_directories(cfg.out + "/runs");
      for (const auto& run : runs) {
        std::string path = cfg.out + "/runs/" + run.tag + ".tsv";
        save_run(run, split_data, path);
      }
    } else {
      auto raw = read_interactions_file(cfg.dataset);
      auto ds = preprocess(raw, cfg.preprocess);
      write_interactions(ds, cfg.out + "/interactions.tsv");
      split_data = split(ds, cfg.ratio, cfg.split_mode, cfg.seed);
      write_split(split_data, split_dir);
      for (const auto& rf : cfg.run_files) {
        runs.push_back(load_run(rf, split_data));
      }
    }
    std::ofstream stats(split_dir + "/stats.txt", std::ios::binary);
    stats << split_stats_report(split_data);
    stats.close();
    double ms = clock.ms();
    if (cfg.source != "synth") {
      detail::add_output(result.manifest, cfg.out + "/interactions.tsv",
                         "split", ms);
    }
    for (const char* f : {"users.tsv", "items.tsv", "train.tsv", "val.tsv",
                          "test.tsv", "stats.txt"}) {
      detail::add_output(result.manifest, split_dir + '/' + f, "split", ms);
    }
    if (cfg.source == "synth") {
      for (const auto& run : runs) {
        detail::add_output(result.manifest, cfg.out + "/runs/" + run.tag + ".tsv",
                           "split", ms);
      }
    }
    checkpoint();
  }
  if (runs.empty()) {
    throw Error("pipeline needs at least one run (config key 'runs')");
  }

  // Stage: re-ranking.
  if (!cfg.rerankers.empty()) {
    detail::StageClock clock;
    fs::create_directories(cfg.out + "/runs");
    std::vector<RunTable> extra;
    for (const auto& base : runs) {
      for (const auto& method : cfg.rerankers) {
        RunTable rr;
        if (method == "gs") {
          GsOptions opt;
          opt.beta = cfg.beta;
          opt.replace_frac = cfg.replace_frac;
          opt.forbidden = &split_data.history;
          rr = greedy_substitution(base, cfg.kprime, opt).run;
        } else if (method == "cm") {
          rr = combmnz(base, cfg.k, cfg.kprime);
        } else {
          rr = borda_count(base, cfg.k, cfg.kprime);
        }
        std::string path = cfg.out + "/runs/" + rr.tag + ".tsv";
        save_run(rr, split_data, path);
        extra.push_back(std::move(rr));
      }
    }
    double ms = clock.ms();
    for (const auto& run : extra) {
      detail::add_output(result.manifest, cfg.out + "/runs/" + run.tag + ".tsv",
                         "rerank", ms);
      runs.push_back(run);
    }
    checkpoint();
  }

  // Stage: measure matrix.
  EvalMatrix em;
  {
    detail::StageClock clock;
    em = evaluate_runs(runs, split_data, cfg.k, cfg.measures, cfg.threads);
    write_eval_csv(em, cfg.out + "/eval.csv");
    detail::add_output(result.manifest, cfg.out + "/eval.csv", "eval",
                       clock.ms());
    checkpoint();
  }

  // Stage: frontier generation.
  PfStageResult pf;
  {
    detail::StageClock clock;
    pf = generate_pf(split_data, cfg.k, cfg.pf_points, cfg.measures);
    write_pf_outputs(pf, cfg.out + "/pf");
    double ms = clock.ms();
    for (const auto& pr : pf.pairs) {
      detail::add_output(result.manifest,
                         cfg.out + "/pf/pf_" +
                             std::string(measure_name(pr.rel)) + '_' +
                             measure_name(pr.fair) + ".csv",
                         "pf", ms);
    }
    detail::add_output(result.manifest, cfg.out + "/pf/pf_meta.txt", "pf", ms);
    checkpoint();
  }

  // Stage: distances.
  DpfrMatrix dm;
  {
    detail::StageClock clock;
    dm = dpfr_matrix(em, pf.frontiers, cfg.alpha);
    write_dpfr_csv(dm, cfg.out + "/dpfr.csv");
    write_best_per_pair(dm, cfg.out + "/dpfr_best.csv");
    double ms = clock.ms();
    detail::add_output(result.manifest, cfg.out + "/dpfr.csv", "dpfr", ms);
    detail::add_output(result.manifest, cfg.out + "/dpfr_best.csv", "dpfr", ms);
    checkpoint();
  }

  // Stage: agreement analysis.
  {
    detail::StageClock clock;
    AnalysisResult ar = analyze(em, dm);
    write_analysis(ar, cfg.out + "/analysis");
    double ms = clock.ms();
    for (const char* f : {"tau.csv", "equivalence.csv", "disagreement.csv"}) {
      detail::add_output(result.manifest, cfg.out + "/analysis/" + f, "analyze",
                         ms);
    }
    checkpoint();
  }
  return result;
}

}  // namespace dpfr
