#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "vsp/analysis.hpp"
#include "vsp/counting.hpp"
#include "vsp/io.hpp"
#include "vsp/mcmc.hpp"

namespace fs = std::filesystem;
using namespace vsp;

namespace {

struct FitOptions {
  std::string config_path;
  std::string input;
  std::string out_dir = ".";
  std::optional<std::string> model;
  std::optional<std::string> param;
  std::optional<long> iterations, burn_in, thin;
  std::optional<uint64_t> seed;
  int lpa = 1;
};

int cmd_fit(const FitOptions& opt) {
  RunConfig cfg;
  if (!opt.config_path.empty()) cfg = parse_run_config(opt.config_path);
  if (opt.model) cfg.mcmc.model = model_from_name(*opt.model);
  if (opt.param) cfg.mcmc.param = param_from_name(*opt.param);
  if (opt.iterations) cfg.mcmc.iterations = *opt.iterations;
  if (opt.burn_in) cfg.mcmc.burn_in = *opt.burn_in;
  if (opt.thin) cfg.mcmc.thin = *opt.thin;
  if (opt.seed) cfg.mcmc.seed = *opt.seed;
  if (!opt.input.empty()) cfg.input = opt.input;
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (cfg.input.empty()) throw Error("no input dataset (use --input or the config file)");
  cfg.mcmc.validate();

  std::string raw = read_file(cfg.input);
  std::string hash = sha256_hex(raw);
  RankDataset ds = dataset_from_json(Json::parse(raw));
  if (opt.lpa > 1) ds = filter_lpa(ds, opt.lpa);

  fs::path out_dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
  fs::create_directories(out_dir);
  fs::path trace_path = out_dir / "trace.jsonl";
  fs::path manifest_path = out_dir / "manifest.json";

  TraceWriter writer(trace_path, cfg.mcmc, ds.actor_ids(), hash);
  ChainTrace trace = run_chain(ds, cfg.mcmc, cfg.priors,
                               [&](const TraceSample& s) { writer.append(s); });
  trace.data_hash = hash;
  writer.finish(trace.accept);

  Json manifest;
  manifest["config"] = run_config_to_json(cfg);
  manifest["data_hash"] = hash;
  manifest["n_actors"] = ds.actors.size();
  manifest["n_lists"] = ds.lists.size();
  manifest["samples"] = trace.samples.size();
  manifest["acceptance"] = Json{{"type_flip", trace.accept.type_flip.rate()},
                                {"edge_global", trace.accept.edge_global.rate()},
                                {"edge_local", trace.accept.edge_local.rate()},
                                {"mdt_edge", trace.accept.mdt_edge.rate()},
                                {"q", trace.accept.upd_q.rate()},
                                {"p", trace.accept.upd_p.rate()},
                                {"phi", trace.accept.upd_phi.rate()}};
  atomic_write_file(manifest_path, manifest.dump(2) + "\n");
  std::cout << "wrote " << trace_path.string() << " (" << trace.samples.size() << " samples)\n";
  return 0;
}

int cmd_simulate(const std::string& tree_path, const std::string& model_s, double p, double phi,
                 long n_lists, uint64_t seed, const std::string& out_path) {
  Mdt m = tree_file_to_mdt(tree_path);
  Model model = model_from_name(model_s);
  Rng rng(seed);
  std::vector<ActorSubset> memberships(static_cast<size_t>(n_lists), m.actors());
  RankDataset ds = simulate_dataset(m, model, p, phi, memberships, rng);
  write_dataset(ds, out_path);
  std::cout << "wrote " << out_path << " (" << ds.lists.size() << " lists)\n";
  return 0;
}

int cmd_summarize(const std::string& trace_path, const std::string& data_path,
                  const std::string& out_dir_s) {
  ChainTrace trace = read_trace(trace_path);
  fs::path out_dir = out_dir_s;
  fs::create_directories(out_dir);
  EdgeMarginals marg = edge_marginals(trace);
  atomic_write_file(out_dir / "marginals.csv", marginals_csv(marg));

  // Group and name metadata come from the dataset when provided; otherwise
  // every actor stands alone under its id.
  std::map<Actor, std::string> groups, names;
  for (Actor a : marg.actors) {
    groups[a] = std::to_string(a);
    names[a] = std::to_string(a);
  }
  if (!data_path.empty()) {
    RankDataset ds = parse_dataset(data_path);
    if (!data_path.empty() && trace.data_hash != sha256_hex(read_file(data_path)))
      std::cerr << "note: dataset does not hash-match the trace manifest\n";
    for (const ActorInfo& a : ds.actors) {
      if (!a.group.empty()) groups[a.id] = a.group;
      if (!a.name.empty()) names[a.id] = a.name;
    }
  }
  ConsensusOrder cons = consensus_order(marg);
  atomic_write_file(out_dir / "consensus.dot", export_dot(cons, groups, names));
  atomic_write_file(out_dir / "depth.csv", depth_histogram_csv(depth_posterior(trace)));
  atomic_write_file(out_dir / "ranks.csv", rank_table_csv(average_rank(trace, groups)));
  std::cout << "wrote summaries under " << out_dir.string() << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& trace_paths, double delta,
                const std::string& out_path) {
  Json report;
  report["traces"] = Json::array();
  for (const std::string& path : trace_paths) {
    ChainTrace trace = read_trace(path);
    Json entry;
    entry["path"] = path;
    entry["model"] = model_name(trace.config.model);
    entry["samples"] = trace.samples.size();
    std::vector<std::vector<double>> pointwise;
    for (const TraceSample& s : trace.samples) pointwise.push_back(s.per_list);
    if (pointwise.size() >= 2 && !pointwise.front().empty()) {
      WaicResult w = waic_elpd(pointwise);
      entry["elpd_waic"] = w.elpd;
      entry["elpd_se"] = w.se;
      entry["p_waic"] = w.p_waic;
    }
    if (trace.config.model == Model::QJB) {
      std::vector<double> phis;
      for (const TraceSample& s : trace.samples) phis.push_back(s.phi);
      // Bayes factors for the nested QJ-U / QJ-D models, with the window
      // sensitivity the boundary estimator calls for.
      Json sd_all = Json::array();
      for (double d : {0.01, delta, 0.05}) {
        SavageDickeyResult sd = savage_dickey_bf(phis, ScalarPrior::uniform01(), d);
        auto enc = [](const BoundaryEstimate& b) {
          Json j;
          if (b.value) j["value"] = *b.value;
          if (b.upper_bound) j["upper_bound"] = *b.upper_bound;
          return j;
        };
        sd_all.push_back(Json{{"delta", d},
                              {"B_UB", enc(sd.b_ub)},
                              {"B_DB", enc(sd.b_db)},
                              {"B_UD", enc(sd.b_ud)}});
      }
      entry["savage_dickey"] = sd_all;
    }
    report["traces"].push_back(entry);
  }
  atomic_write_file(out_path, report.dump(2) + "\n");
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_count_le(const std::string& path) {
  Mdt m = tree_file_to_mdt(path);
  std::cout << count_le(m).value.get_str() << "\n";
  return 0;
}

int cmd_check_vsp(const std::string& path) {
  Json j = Json::parse(read_file(path));
  PartialOrder po = partial_order_from_json(j);
  auto witness = forbidden_subgraph_witness(po);
  if (!witness) {
    std::cout << "VSP: yes\n";
    return 0;
  }
  std::cout << "VSP: no\nwitness actors:";
  for (int pos : *witness) std::cout << ' ' << po.labels()[pos];
  std::cout << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian inference for vertex-series-parallel partial orders"};
  app.require_subcommand(1);

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "run MCMC on a rank-order dataset");
  fit_cmd->add_option("--config", fit.config_path, "run configuration JSON");
  fit_cmd->add_option("--input", fit.input, "dataset JSON");
  fit_cmd->add_option("--out", fit.out_dir, "output directory");
  auto add_opt = [&](const char* name, auto& slot, const char* help) {
    fit_cmd->add_option_function<std::decay_t<decltype(*slot)>>(
        name, [&slot](const auto& v) { slot = v; }, help);
  };
  add_opt("--model", fit.model, "qj-u | qj-d | qj-b");
  add_opt("--param", fit.param, "bdt | mdt");
  add_opt("--iterations", fit.iterations, "MCMC sweeps");
  add_opt("--burn-in", fit.burn_in, "sweeps discarded");
  add_opt("--thin", fit.thin, "record every k-th sweep");
  add_opt("--seed", fit.seed, "RNG seed");
  fit_cmd->add_option("--lpa", fit.lpa, "keep actors in at least K lists");

  std::string sim_tree, sim_model = "qj-u", sim_out = "simulated.json";
  double sim_p = 0.1, sim_phi = 0.5;
  long sim_lists = 20;
  uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a dataset from a tree");
  sim_cmd->add_option("--tree", sim_tree, "tree or partial-order JSON")->required();
  sim_cmd->add_option("--model", sim_model, "qj-u | qj-d | qj-b");
  sim_cmd->add_option("--p", sim_p, "error probability");
  sim_cmd->add_option("--phi", sim_phi, "top placement probability (qj-b)");
  sim_cmd->add_option("--lists", sim_lists, "number of lists");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "output dataset path");

  std::string sum_trace, sum_data, sum_out = "summary";
  auto* sum_cmd = app.add_subcommand("summarize", "consensus, ranks and depth from a trace");
  sum_cmd->add_option("trace", sum_trace, "trace.jsonl")->required();
  sum_cmd->add_option("--data", sum_data, "dataset JSON for names and groups");
  sum_cmd->add_option("--out", sum_out, "output directory");

  std::vector<std::string> cmp_traces;
  std::string cmp_out = "compare.json";
  double cmp_delta = 0.02;
  auto* cmp_cmd = app.add_subcommand("compare", "WAIC and Bayes factor report");
  cmp_cmd->add_option("traces", cmp_traces, "trace files")->required();
  cmp_cmd->add_option("--delta", cmp_delta, "Savage-Dickey window");
  cmp_cmd->add_option("--out", cmp_out, "report path");

  std::string cnt_path;
  auto* cnt_cmd = app.add_subcommand("count-le", "exact linear extension count");
  cnt_cmd->add_option("file", cnt_path, "tree or partial-order JSON")->required();

  std::string chk_path;
  auto* chk_cmd = app.add_subcommand("check-vsp", "forbidden sub-graph test");
  chk_cmd->add_option("file", chk_path, "partial-order JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*sim_cmd) return cmd_simulate(sim_tree, sim_model, sim_p, sim_phi, sim_lists, sim_seed, sim_out);
    if (*sum_cmd) return cmd_summarize(sum_trace, sum_data, sum_out);
    if (*cmp_cmd) return cmd_compare(cmp_traces, cmp_delta, cmp_out);
    if (*cnt_cmd) return cmd_count_le(cnt_path);
    if (*chk_cmd) return cmd_check_vsp(chk_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
