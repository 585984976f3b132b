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

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpfr/pipeline.hpp"

namespace {

using nlohmann::json;

std::vector<dpfr::Measure> parse_measure_list(const std::string& spec) {
  if (spec == "all") {
    return dpfr::all_measures();
  }
  std::vector<dpfr::Measure> out;
  for (auto part : dpfr::split_fields(spec, ',')) {
    out.push_back(dpfr::parse_measure(part));
  }
  return out;
}

void emit(bool as_json, const json& j, const std::string& text) {
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint fairness/relevance evaluation of recommender runs "
               "against an empirical Pareto frontier"};
  app.set_version_flag("--version", dpfr::version());
  app.require_subcommand(1);
  app.fallthrough();  // lets --json appear after the subcommand
  bool as_json = false;
  app.add_flag("--json", as_json, "emit machine-readable summaries");

  // ---- preprocess ----------------------------------------------------------
  auto* cmd_pre = app.add_subcommand(
      "preprocess", "dedup, rating-threshold, cap and core-filter a dataset");
  std::string pre_in, pre_out = "out";
  double pre_min_rating = -1;
  std::int64_t pre_cap = -1;
  int pre_core = 5;
  cmd_pre->add_option("--in", pre_in, "interactions file")->required();
  cmd_pre->add_option("--out", pre_out, "output directory");
  cmd_pre->add_option("--min-rating", pre_min_rating,
                      "drop rated interactions below this value");
  cmd_pre->add_option("--max-user-interactions", pre_cap,
                      "drop users with more interactions");
  cmd_pre->add_option("--core", pre_core, "iterative core level (default 5)");

  // ---- split ---------------------------------------------------------------
  auto* cmd_split =
      app.add_subcommand("split", "derive the train/val/test split");
  std::string sp_in, sp_out = "out", sp_mode = "random", sp_ratio = "0.6,0.2,0.2";
  std::uint64_t sp_seed = 42;
  cmd_split->add_option("--in", sp_in, "preprocessed interactions file")
      ->required();
  cmd_split->add_option("--out", sp_out, "output directory");
  cmd_split->add_option("--mode", sp_mode, "temporal or random");
  cmd_split->add_option("--seed", sp_seed, "shuffle seed for random mode");
  cmd_split->add_option("--ratio", sp_ratio, "train,val,test ratio");

  // ---- synth ---------------------------------------------------------------
  auto* cmd_synth = app.add_subcommand(
      "synth", "generate a deterministic synthetic dataset and runs");
  std::string sy_out = "out", sy_preset = "tiny";
  std::uint64_t sy_seed = 1;
  int sy_users = 0, sy_items = 0, sy_k = 0, sy_runs = 0, sy_list = 0;
  double sy_skew = -1;
  cmd_synth->add_option("--out", sy_out, "output directory");
  cmd_synth->add_option("--preset", sy_preset, "tiny or mid");
  cmd_synth->add_option("--seed", sy_seed, "generation seed");
  cmd_synth->add_option("--users", sy_users, "override user count");
  cmd_synth->add_option("--items", sy_items, "override item count");
  cmd_synth->add_option("--k", sy_k, "override cutoff");
  cmd_synth->add_option("--list-len", sy_list, "override run list length");
  cmd_synth->add_option("--runs", sy_runs, "override run count");
  cmd_synth->add_option("--skew", sy_skew, "override popularity skew");

  // ---- rerank --------------------------------------------------------------
  auto* cmd_rr = app.add_subcommand("rerank", "re-rank a run for fairness");
  std::string rr_method, rr_in, rr_out_file, rr_split;
  int rr_k = 10, rr_kprime = 25;
  double rr_beta = 0.05, rr_frac = 0.25;
  cmd_rr->add_option("--method", rr_method, "gs, cm or bc")->required();
  cmd_rr->add_option("--in", rr_in, "run file")->required();
  cmd_rr->add_option("--out", rr_out_file, "output run file")->required();
  cmd_rr->add_option("--split", rr_split, "split directory")->required();
  cmd_rr->add_option("--k", rr_k, "evaluation cutoff");
  cmd_rr->add_option("--kprime", rr_kprime, "re-ranking depth");
  cmd_rr->add_option("--beta", rr_beta, "gs quantile");
  cmd_rr->add_option("--replace-frac", rr_frac, "gs replacement budget");

  // ---- eval ----------------------------------------------------------------
  auto* cmd_eval = app.add_subcommand("eval", "score runs with all measures");
  std::string ev_split, ev_out = "out", ev_measures = "all";
  std::vector<std::string> ev_runs;
  int ev_k = 10, ev_threads = 1;
  cmd_eval->add_option("--split", ev_split, "split directory")->required();
  cmd_eval->add_option("--runs", ev_runs, "run files")->required();
  cmd_eval->add_option("--k", ev_k, "cutoff");
  cmd_eval->add_option("--measures", ev_measures, "comma list or 'all'");
  cmd_eval->add_option("--threads", ev_threads, "worker cap");
  cmd_eval->add_option("--out", ev_out, "output directory");

  // ---- pf ------------------------------------------------------------------
  auto* cmd_pf = app.add_subcommand(
      "pf", "generate the empirical Pareto frontier from the test split");
  std::string pf_split, pf_out = "out", pf_points = "full",
              pf_measures = "P,R,MAP,NDCG,Jain,Ent,Gini";
  int pf_k = 10;
  cmd_pf->add_option("--split", pf_split, "split directory")->required();
  cmd_pf->add_option("--k", pf_k, "cutoff");
  cmd_pf->add_option("--points", pf_points, "'full' or point count p >= 2");
  cmd_pf->add_option("--measures", pf_measures, "rel and fair measures");
  cmd_pf->add_option("--out", pf_out, "output directory");

  // ---- dpfr ----------------------------------------------------------------
  auto* cmd_d = app.add_subcommand(
      "dpfr", "distance of each run to the frontier reference point");
  std::string d_pf, d_eval, d_out = "out";
  double d_alpha = 0.5;
  cmd_d->add_option("--pf", d_pf, "frontier CSV directory")->required();
  cmd_d->add_option("--eval", d_eval, "eval.csv from the eval stage")
      ->required();
  cmd_d->add_option("--alpha", d_alpha, "fairness weight in [0,1]");
  cmd_d->add_option("--out", d_out, "output directory");

  // ---- analyze -------------------------------------------------------------
  auto* cmd_an = app.add_subcommand(
      "analyze", "rank agreement and best-model disagreement tables");
  std::string an_eval, an_dpfr, an_out = "out";
  cmd_an->add_option("--eval", an_eval, "eval.csv")->required();
  cmd_an->add_option("--dpfr", an_dpfr, "dpfr.csv")->required();
  cmd_an->add_option("--out", an_out, "output directory");

  // ---- pipeline ------------------------------------------------------------
  auto* cmd_pipe =
      app.add_subcommand("pipeline", "run every stage from one configuration");
  std::string pi_config, pi_out, pi_synth;
  std::vector<std::string> pi_set;
  cmd_pipe->add_option("--config", pi_config, "flat key=value config file");
  cmd_pipe->add_option("--synth", pi_synth,
                       "shortcut: run on a synthetic preset (tiny or mid)");
  cmd_pipe->add_option("--out", pi_out, "output directory override");
  cmd_pipe->add_option("--set", pi_set, "config overrides as key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_pre) {
      dpfr::PreprocessConfig cfg;
      if (pre_min_rating >= 0) {
        cfg.min_rating = pre_min_rating;
      }
      if (pre_cap >= 0) {
        cfg.max_user_interactions = pre_cap;
      }
      cfg.core = pre_core;
      auto ds = dpfr::preprocess(dpfr::read_interactions_file(pre_in), cfg);
      std::filesystem::create_directories(pre_out);
      dpfr::write_interactions(ds, pre_out + "/interactions.tsv");
      std::ofstream stats(pre_out + "/stats.txt", std::ios::binary);
      stats << "users\t" << ds.num_users() << "\nitems\t" << ds.num_items()
            << "\ninteractions\t" << ds.interactions.size()
            << "\nsparsity_pct\t" << dpfr::fmt_double(ds.sparsity_pct())
            << '\n';
      emit(as_json,
           json{{"users", ds.num_users()},
                {"items", ds.num_items()},
                {"interactions", ds.interactions.size()},
                {"sparsity_pct", ds.sparsity_pct()},
                {"out", pre_out}},
           "preprocessed: " + std::to_string(ds.num_users()) + " users, " +
               std::to_string(ds.num_items()) + " items, " +
               std::to_string(ds.interactions.size()) + " interactions\n");
    } else if (*cmd_split) {
      auto raw = dpfr::read_interactions_file(sp_in);
      auto ds = dpfr::preprocess(raw, dpfr::PreprocessConfig{
                                          std::nullopt, std::nullopt, 0});
      auto f = dpfr::split_fields(sp_ratio, ',');
      if (f.size() != 3) {
        throw dpfr::Error("--ratio needs three comma-separated values");
      }
      dpfr::SplitRatio ratio{*dpfr::parse_double(f[0]),
                             *dpfr::parse_double(f[1]),
                             *dpfr::parse_double(f[2])};
      auto mode = sp_mode == "temporal" ? dpfr::SplitMode::Temporal
                                        : dpfr::SplitMode::Random;
      auto sd = dpfr::split(ds, ratio, mode, sp_seed);
      dpfr::write_split(sd, sp_out);
      std::ofstream stats(sp_out + "/stats.txt", std::ios::binary);
      stats << dpfr::split_stats_report(sd);
      emit(as_json,
           json{{"users", sd.num_users()},
                {"items", sd.num_items()},
                {"test_users", sd.num_test_users()},
                {"out", sp_out}},
           dpfr::split_stats_report(sd));
    } else if (*cmd_synth) {
      dpfr::SynthSpec spec = sy_preset == "mid" ? dpfr::SynthSpec::mid(sy_seed)
                                                : dpfr::SynthSpec::tiny(sy_seed);
      if (sy_users > 0) spec.m = sy_users;
      if (sy_items > 0) spec.n = sy_items;
      if (sy_k > 0) spec.k = sy_k;
      if (sy_list > 0) spec.list_len = sy_list;
      if (sy_runs > 0) spec.num_runs = sy_runs;
      if (sy_skew >= 0) spec.skew = sy_skew;
      auto inst = dpfr::generate(spec);
      dpfr::write_split(inst.split, sy_out + "/split");
      std::ofstream stats(sy_out + "/split/stats.txt", std::ios::binary);
      stats << dpfr::split_stats_report(inst.split);
      std::filesystem::create_directories(sy_out + "/runs");
      for (const auto& run : inst.runs) {
        dpfr::save_run(run, inst.split, sy_out + "/runs/" + run.tag + ".tsv");
      }
      emit(as_json,
           json{{"users", spec.m},
                {"items", spec.n},
                {"k", spec.k},
                {"runs", inst.runs.size()},
                {"out", sy_out}},
           "synthetic instance: " + std::to_string(spec.m) + " users, " +
               std::to_string(spec.n) + " items, " +
               std::to_string(inst.runs.size()) + " runs under " + sy_out +
               "\n");
    } else if (*cmd_rr) {
      auto sd = dpfr::read_split(rr_split);
      auto run = dpfr::load_run(rr_in, sd);
      dpfr::RunTable out;
      if (rr_method == "gs") {
        dpfr::GsOptions opt;
        opt.beta = rr_beta;
        opt.replace_frac = rr_frac;
        opt.forbidden = &sd.history;
        auto res = dpfr::greedy_substitution(run, rr_kprime, opt);
        out = std::move(res.run);
        emit(as_json,
             json{{"attempted", res.attempted},
                  {"applied", res.applied},
                  {"skipped", res.skipped}},
             "gs: attempted " + std::to_string(res.attempted) + ", applied " +
                 std::to_string(res.applied) + ", skipped " +
                 std::to_string(res.skipped) + "\n");
      } else if (rr_method == "cm") {
        out = dpfr::combmnz(run, rr_k, rr_kprime);
      } else if (rr_method == "bc") {
        out = dpfr::borda_count(run, rr_k, rr_kprime);
      } else {
        throw dpfr::Error("--method must be gs, cm or bc");
      }
      dpfr::save_run(out, sd, rr_out_file);
    } else if (*cmd_eval) {
      auto sd = dpfr::read_split(ev_split);
      std::vector<dpfr::RunTable> runs;
      for (const auto& rf : ev_runs) {
        runs.push_back(dpfr::load_run(rf, sd));
      }
      auto em = dpfr::evaluate_runs(runs, sd, ev_k,
                                    parse_measure_list(ev_measures),
                                    ev_threads);
      std::filesystem::create_directories(ev_out);
      dpfr::write_eval_csv(em, ev_out + "/eval.csv");
      json j{{"runs", em.runs}, {"out", ev_out + "/eval.csv"}};
      std::size_t dropped = 0;
      for (const auto& r : runs) {
        dropped += r.dropped_users;
      }
      j["dropped_users"] = dropped;
      emit(as_json, j,
           "scored " + std::to_string(runs.size()) + " runs (" +
               std::to_string(dropped) +
               " run-file users outside the test split)\n");
    } else if (*cmd_pf) {
      auto sd = dpfr::read_split(pf_split);
      int points = pf_points == "full"
                       ? 0
                       : static_cast<int>(*dpfr::parse_int(pf_points));
      auto res = dpfr::generate_pf(sd, pf_k, points,
                                   parse_measure_list(pf_measures));
      dpfr::write_pf_outputs(res, pf_out);
      json pairs = json::array();
      for (std::size_t i = 0; i < res.pairs.size(); ++i) {
        pairs.push_back({{"pair", res.pairs[i].name()},
                         {"fit", res.frontiers[i].fit},
                         {"points", res.frontiers[i].points.size()}});
      }
      emit(as_json,
           json{{"recorded", res.trace.records.size()},
               {"replacements", res.trace.replacements},
                {"wall_ms", res.wall_ms},
                {"pairs", pairs}},
           "frontier: " + std::to_string(res.trace.records.size()) +
               " recorded points over " +
               std::to_string(res.trace.replacements) + " replacements\n");
    } else if (*cmd_d) {
      auto em = dpfr::read_eval_csv(d_eval);
      auto frontiers = dpfr::read_pf_dir(d_pf);
      auto dm = dpfr::dpfr_matrix(em, frontiers, d_alpha);
      std::filesystem::create_directories(d_out);
      dpfr::write_dpfr_csv(dm, d_out + "/dpfr.csv");
      dpfr::write_best_per_pair(dm, d_out + "/dpfr_best.csv");
      emit(as_json,
           json{{"runs", dm.runs.size()},
                {"pairs", dm.pairs.size()},
                {"out", d_out + "/dpfr.csv"}},
           "distances for " + std::to_string(dm.runs.size()) + " runs x " +
               std::to_string(dm.pairs.size()) + " fit pairs\n");
    } else if (*cmd_an) {
      auto em = dpfr::read_eval_csv(an_eval);
      auto dm = dpfr::read_dpfr_csv(an_dpfr);
      auto ar = dpfr::analyze(em, dm);
      dpfr::write_analysis(ar, an_out);
      emit(as_json,
           json{{"evaluators", ar.evaluators.size()},
                {"pairs", ar.pairs.size()},
                {"disagreement_all_pct", ar.disagreement.pct_all},
                {"out", an_out}},
           "analysis written to " + an_out + " (overall disagreement " +
               dpfr::fmt_double(ar.disagreement.pct_all) + "%)\n");
    } else if (*cmd_pipe) {
      dpfr::PipelineConfig cfg;
      if (!pi_config.empty()) {
        cfg = dpfr::read_config(pi_config);
      }
      if (!pi_synth.empty()) {
        dpfr::apply_config_entry(cfg, "source", "synth");
        dpfr::apply_config_entry(cfg, "synth_preset", pi_synth);
      }
      for (const auto& kv : pi_set) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
          throw dpfr::Error("--set expects key=value, got: " + kv);
        }
        dpfr::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (!pi_out.empty()) {
        cfg.out = pi_out;
      }
      auto res = dpfr::run_pipeline(cfg);
      json files = json::array();
      for (const auto& e : res.manifest) {
        files.push_back({{"path", e.path}, {"hash", e.hash}, {"stage", e.stage}});
      }
      emit(as_json, json{{"out", res.out_dir}, {"artifacts", files}},
           "pipeline complete: " + std::to_string(res.manifest.size()) +
               " artifacts under " + res.out_dir + " (see manifest.txt)\n");
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
  return 0;
}
