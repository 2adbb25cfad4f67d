#include "vsp/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "vsp/error.hpp"

namespace vsp {

namespace {

constexpr int kTraceFormatVersion = 1;

void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError("unknown key '" + it.key() + "' in " + where);
}

} // namespace

// ---------------------------------------------------------------------------
// Trees

namespace {

Json mdt_node_to_json(const Mdt& m, int v) {
  if (m.is_leaf(v)) return Json{{"actor", m.actor(v)}};
  Json node;
  node["type"] = m.is_s(v) ? "S" : "P";
  Json kids = Json::array();
  for (int c : m.children(v)) kids.push_back(mdt_node_to_json(m, c));
  node["children"] = std::move(kids);
  return node;
}

Mdt mdt_node_from_json(const Json& j) {
  if (j.contains("actor")) return Mdt::single(j.at("actor").get<Actor>());
  std::string type = j.at("type").get<std::string>();
  if (type != "S" && type != "P") throw ParseError("node type must be S or P");
  std::vector<Mdt> kids;
  for (const Json& c : j.at("children")) kids.push_back(mdt_node_from_json(c));
  return Mdt::internal(type == "S", std::move(kids));
}

Json bdt_node_to_json(const Bdt& t, int v) {
  if (t.is_leaf(v)) return Json{{"actor", t.actor(v)}};
  Json node;
  node["type"] = t.is_s(v) ? "S" : "P";
  Json kids = Json::array();
  // S children serialized upper then lower; P order carries no meaning.
  int first = t.is_s(v) ? t.upper_child(v) : t.child(v, 0);
  int second = t.is_s(v) ? t.lower_child(v) : t.child(v, 1);
  kids.push_back(bdt_node_to_json(t, first));
  kids.push_back(bdt_node_to_json(t, second));
  node["children"] = std::move(kids);
  return node;
}

Bdt bdt_node_from_json(const Json& j) {
  if (j.contains("actor")) return Bdt::single(j.at("actor").get<Actor>());
  std::string type = j.at("type").get<std::string>();
  if (type != "S" && type != "P") throw ParseError("node type must be S or P");
  const Json& kids = j.at("children");
  if (kids.size() != 2) throw ParseError("bdt internal node needs exactly 2 children");
  return Bdt::combine(type == "S", bdt_node_from_json(kids[0]), bdt_node_from_json(kids[1]));
}

} // namespace

Json mdt_to_json(const Mdt& m) {
  return Json{{"kind", "mdt"}, {"root", mdt_node_to_json(m, m.root())}};
}

Mdt mdt_from_json(const Json& j) {
  if (j.value("kind", "mdt") != "mdt") throw ParseError("expected kind 'mdt'");
  Mdt m = mdt_node_from_json(j.at("root"));
  m.validate();
  return m;
}

Json bdt_to_json(const Bdt& t) {
  return Json{{"kind", "bdt"}, {"root", bdt_node_to_json(t, t.root())}};
}

Bdt bdt_from_json(const Json& j) {
  if (j.value("kind", "bdt") != "bdt") throw ParseError("expected kind 'bdt'");
  Bdt t = bdt_node_from_json(j.at("root"));
  t.validate();
  return t;
}

Json partial_order_to_json(const PartialOrder& po) {
  Json j;
  j["kind"] = "partial_order";
  j["actors"] = po.labels();
  Json edges = Json::array();
  for (const Edge& e : transitive_reduction(po))
    edges.push_back(Json::array({po.labels()[e.from], po.labels()[e.to]}));
  j["edges"] = std::move(edges);
  return j;
}

PartialOrder partial_order_from_json(const Json& j) {
  std::vector<Actor> labels = j.at("actors").get<std::vector<Actor>>();
  int n = static_cast<int>(labels.size());
  std::map<Actor, int> pos;
  for (int i = 0; i < n; ++i) {
    if (pos.count(labels[i])) throw ParseError("duplicate actor id");
    pos[labels[i]] = i;
  }
  BitMatrix raw(n);
  for (const Json& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ParseError("edge must be a pair");
    Actor a = e[0].get<Actor>(), b = e[1].get<Actor>();
    if (!pos.count(a) || !pos.count(b)) throw UnknownActorId("edge references unknown actor");
    raw.set(pos[a], pos[b], true);
  }
  return transitive_closure(raw, labels);
}

Mdt tree_file_to_mdt(const std::filesystem::path& path) {
  Json j = Json::parse(read_file(path));
  std::string kind = j.value("kind", "");
  if (kind == "mdt") return mdt_from_json(j);
  if (kind == "bdt") return bdt_collapse_to_mdt(bdt_from_json(j));
  if (kind == "partial_order") return vsp_to_mdt(partial_order_from_json(j));
  throw ParseError("unknown kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Datasets

Json dataset_to_json(const RankDataset& ds) {
  Json j;
  Json actors = Json::array();
  for (const ActorInfo& a : ds.actors)
    actors.push_back(Json{{"id", a.id}, {"name", a.name}, {"group", a.group}});
  j["actors"] = std::move(actors);
  Json lists = Json::array();
  for (const RankList& l : ds.lists) lists.push_back(l.ordering);
  j["lists"] = std::move(lists);
  return j;
}

RankDataset dataset_from_json(const Json& j) {
  reject_unknown_keys(j, {"actors", "lists"}, "dataset");
  RankDataset ds;
  std::set<Actor> ids;
  for (const Json& a : j.at("actors")) {
    reject_unknown_keys(a, {"id", "name", "group"}, "dataset actor");
    ActorInfo info;
    info.id = a.at("id").get<Actor>();
    info.name = a.value("name", "");
    info.group = a.value("group", "");
    if (!ids.insert(info.id).second)
      throw ParseError("duplicate actor id " + std::to_string(info.id));
    ds.actors.push_back(std::move(info));
  }
  size_t line = 0;
  for (const Json& l : j.at("lists")) {
    ++line;
    RankList list;
    std::set<Actor> seen;
    for (const Json& v : l) {
      Actor a = v.get<Actor>();
      if (!ids.count(a))
        throw UnknownActorId("list " + std::to_string(line) + " references unknown actor " +
                             std::to_string(a));
      if (!seen.insert(a).second)
        throw DuplicateInList("list " + std::to_string(line) + " repeats actor " +
                              std::to_string(a));
      list.ordering.push_back(a);
    }
    if (list.ordering.empty()) throw ParseError("list " + std::to_string(line) + " is empty");
    ds.lists.push_back(std::move(list));
  }
  return ds;
}

RankDataset parse_dataset(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("dataset parse error: ") + e.what());
  }
  return dataset_from_json(j);
}

void write_dataset(const RankDataset& ds, const std::filesystem::path& path) {
  atomic_write_file(path, dataset_to_json(ds).dump(2) + "\n");
}

RankDataset filter_lpa(const RankDataset& ds, int k) {
  if (k < 1) throw Error("k must be >= 1");
  std::map<Actor, int> appearances;
  for (const RankList& l : ds.lists)
    for (Actor a : l.ordering) appearances[a]++;
  RankDataset out;
  std::set<Actor> kept;
  for (const ActorInfo& a : ds.actors)
    if (appearances[a.id] >= k) {
      kept.insert(a.id);
      out.actors.push_back(a);
    }
  for (const RankList& l : ds.lists) {
    RankList nl;
    for (Actor a : l.ordering)
      if (kept.count(a)) nl.ordering.push_back(a);
    if (!nl.ordering.empty()) out.lists.push_back(std::move(nl));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

ScalarPrior scalar_prior_from_json(const Json& j, const std::string& where) {
  reject_unknown_keys(j, {"kind", "mean", "sd", "lo", "hi"}, where);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "logistic_normal")
    return ScalarPrior::logistic_normal(j.value("mean", 0.0), j.value("sd", 1.5));
  if (kind == "uniform") {
    ScalarPrior sp = ScalarPrior::uniform01();
    sp.a = j.value("lo", 0.0);
    sp.b = j.value("hi", 1.0);
    return sp;
  }
  throw ParseError("unknown prior kind '" + kind + "' in " + where);
}

Json scalar_prior_to_json(const ScalarPrior& sp) {
  if (sp.kind == ScalarPrior::Kind::LogisticNormal)
    return Json{{"kind", "logistic_normal"}, {"mean", sp.a}, {"sd", sp.b}};
  return Json{{"kind", "uniform"}, {"lo", sp.a}, {"hi", sp.b}};
}

} // namespace

RunConfig run_config_from_json(const Json& j) {
  reject_unknown_keys(j,
                      {"model", "param", "iterations", "burn_in", "thin", "seed",
                       "local_per_global", "step_q", "step_p", "step_phi", "priors", "input",
                       "out"},
                      "run config");
  RunConfig cfg;
  if (j.contains("model")) cfg.mcmc.model = model_from_name(j.at("model").get<std::string>());
  if (j.contains("param")) cfg.mcmc.param = param_from_name(j.at("param").get<std::string>());
  cfg.mcmc.iterations = j.value("iterations", cfg.mcmc.iterations);
  cfg.mcmc.burn_in = j.value("burn_in", cfg.mcmc.burn_in);
  cfg.mcmc.thin = j.value("thin", cfg.mcmc.thin);
  cfg.mcmc.seed = j.value("seed", cfg.mcmc.seed);
  cfg.mcmc.local_per_global = j.value("local_per_global", cfg.mcmc.local_per_global);
  cfg.mcmc.step_q = j.value("step_q", cfg.mcmc.step_q);
  cfg.mcmc.step_p = j.value("step_p", cfg.mcmc.step_p);
  cfg.mcmc.step_phi = j.value("step_phi", cfg.mcmc.step_phi);
  if (j.contains("priors")) {
    const Json& pr = j.at("priors");
    reject_unknown_keys(pr, {"eta_mean", "eta_sd", "p_prior", "phi_prior"}, "priors");
    cfg.priors.eta_mean = pr.value("eta_mean", cfg.priors.eta_mean);
    cfg.priors.eta_sd = pr.value("eta_sd", cfg.priors.eta_sd);
    if (pr.contains("p_prior"))
      cfg.priors.p_prior = scalar_prior_from_json(pr.at("p_prior"), "p_prior");
    if (pr.contains("phi_prior"))
      cfg.priors.phi_prior = scalar_prior_from_json(pr.at("phi_prior"), "phi_prior");
  }
  cfg.input = j.value("input", "");
  cfg.out_dir = j.value("out", "");
  cfg.mcmc.validate();
  return cfg;
}

Json run_config_to_json(const RunConfig& cfg) {
  Json j;
  j["model"] = model_name(cfg.mcmc.model);
  j["param"] = param_name(cfg.mcmc.param);
  j["iterations"] = cfg.mcmc.iterations;
  j["burn_in"] = cfg.mcmc.burn_in;
  j["thin"] = cfg.mcmc.thin;
  j["seed"] = cfg.mcmc.seed;
  j["local_per_global"] = cfg.mcmc.local_per_global;
  j["step_q"] = cfg.mcmc.step_q;
  j["step_p"] = cfg.mcmc.step_p;
  j["step_phi"] = cfg.mcmc.step_phi;
  j["priors"] = Json{{"eta_mean", cfg.priors.eta_mean},
                     {"eta_sd", cfg.priors.eta_sd},
                     {"p_prior", scalar_prior_to_json(cfg.priors.p_prior)},
                     {"phi_prior", scalar_prior_to_json(cfg.priors.phi_prior)}};
  if (!cfg.input.empty()) j["input"] = cfg.input;
  if (!cfg.out_dir.empty()) j["out"] = cfg.out_dir;
  return j;
}

RunConfig parse_run_config(const std::filesystem::path& path) {
  try {
    return run_config_from_json(Json::parse(read_file(path)));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("config parse error: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Traces

namespace {

Json sample_to_json(const TraceSample& s) {
  Json j;
  j["tree"] = mdt_to_json(s.tree);
  j["q"] = s.q;
  j["p"] = s.p;
  j["phi"] = s.phi;
  j["log_prior"] = s.log_prior;
  j["log_lik"] = s.log_lik;
  j["per_list"] = s.per_list;
  return j;
}

TraceSample sample_from_json(const Json& j) {
  TraceSample s;
  s.tree = mdt_from_json(j.at("tree"));
  s.q = j.at("q").get<double>();
  s.p = j.at("p").get<double>();
  s.phi = j.at("phi").get<double>();
  s.log_prior = j.at("log_prior").get<double>();
  s.log_lik = j.at("log_lik").get<double>();
  s.per_list = j.at("per_list").get<std::vector<double>>();
  return s;
}

Json accept_to_json(const AcceptStats& a) {
  auto c = [](const AcceptCounter& x) {
    return Json{{"proposed", x.proposed}, {"accepted", x.accepted}};
  };
  return Json{{"type_flip", c(a.type_flip)},   {"edge_global", c(a.edge_global)},
              {"edge_local", c(a.edge_local)}, {"mdt_edge", c(a.mdt_edge)},
              {"q", c(a.upd_q)},               {"p", c(a.upd_p)},
              {"phi", c(a.upd_phi)}};
}

AcceptStats accept_from_json(const Json& j) {
  auto c = [&](const std::string& key) {
    AcceptCounter x;
    if (j.contains(key)) {
      x.proposed = j.at(key).value("proposed", 0L);
      x.accepted = j.at(key).value("accepted", 0L);
    }
    return x;
  };
  AcceptStats a;
  a.type_flip = c("type_flip");
  a.edge_global = c("edge_global");
  a.edge_local = c("edge_local");
  a.mdt_edge = c("mdt_edge");
  a.upd_q = c("q");
  a.upd_p = c("p");
  a.upd_phi = c("phi");
  return a;
}

Json header_json(const McmcConfig& cfg, const std::vector<Actor>& actors,
                 const std::string& data_hash) {
  RunConfig rc;
  rc.mcmc = cfg;
  Json j;
  j["format_version"] = kTraceFormatVersion;
  j["record"] = "header";
  j["config"] = run_config_to_json(rc);
  j["seed"] = cfg.seed;
  j["actors"] = actors;
  j["data_hash"] = data_hash;
  return j;
}

} // namespace

TraceWriter::TraceWriter(const std::filesystem::path& path, const McmcConfig& cfg,
                         const std::vector<Actor>& actors, const std::string& data_hash)
    : path_(path), partial_(path.string() + ".partial") {
  f_ = std::fopen(partial_.c_str(), "w");
  if (!f_) throw Error("cannot open " + partial_.string());
  std::string line = header_json(cfg, actors, data_hash).dump() + "\n";
  std::fwrite(line.data(), 1, line.size(), f_);
}

void TraceWriter::append(const TraceSample& s) {
  Json j = sample_to_json(s);
  j["record"] = "sample";
  std::string line = j.dump() + "\n";
  std::fwrite(line.data(), 1, line.size(), f_);
  std::fflush(f_);
}

void TraceWriter::finish(const AcceptStats& accept) {
  Json j;
  j["record"] = "footer";
  j["accept"] = accept_to_json(accept);
  std::string line = j.dump() + "\n";
  std::fwrite(line.data(), 1, line.size(), f_);
  std::fclose(f_);
  f_ = nullptr;
  finished_ = true;
  std::filesystem::rename(partial_, path_);
}

TraceWriter::~TraceWriter() {
  if (f_) std::fclose(f_);
}

void write_trace(const ChainTrace& trace, const std::filesystem::path& path) {
  TraceWriter w(path, trace.config, trace.actors, trace.data_hash);
  for (const TraceSample& s : trace.samples) w.append(s);
  w.finish(trace.accept);
}

namespace {

ChainTrace read_trace_impl(const std::filesystem::path& path, bool tolerate_truncation,
                           bool* truncated) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  ChainTrace trace;
  std::string line;
  bool have_header = false, have_footer = false;
  bool bad_tail = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      bad_tail = true;
      break;
    }
    std::string record = j.value("record", "");
    if (!have_header) {
      if (record != "header")
        throw SchemaMismatch("trace does not start with a header record");
      int version = j.value("format_version", -1);
      if (version != kTraceFormatVersion)
        throw SchemaMismatch("unsupported trace format_version " + std::to_string(version));
      RunConfig rc = run_config_from_json(j.at("config"));
      trace.config = rc.mcmc;
      trace.actors = j.at("actors").get<std::vector<Actor>>();
      trace.data_hash = j.value("data_hash", "");
      have_header = true;
    } else if (record == "sample") {
      try {
        trace.samples.push_back(sample_from_json(j));
      } catch (const std::exception&) {
        bad_tail = true;
        break;
      }
    } else if (record == "footer") {
      trace.accept = accept_from_json(j.at("accept"));
      have_footer = true;
    } else {
      throw SchemaMismatch("unknown record type '" + record + "'");
    }
  }
  if (truncated) *truncated = bad_tail || !have_footer;
  if (!tolerate_truncation && (bad_tail || !have_footer))
    throw TruncatedTrace("trace at " + path.string() +
                         " is truncated (recoverable prefix: " +
                         std::to_string(trace.samples.size()) + " samples)");
  return trace;
}

} // namespace

ChainTrace read_trace(const std::filesystem::path& path) {
  return read_trace_impl(path, false, nullptr);
}

ChainTrace read_trace_prefix(const std::filesystem::path& path, bool* truncated) {
  return read_trace_impl(path, true, truncated);
}

// ---------------------------------------------------------------------------
// Exports

namespace {

const char* kPalette[] = {"goldenrod", "maroon",    "magenta",   "skyblue",  "springgreen",
                          "violet",    "apricot",   "gray",      "royalblue", "fuchsia",
                          "tan",       "turquoise", "olivedrab", "salmon",   "plum"};

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

} // namespace

std::string export_dot(const ConsensusOrder& consensus, const std::map<Actor, std::string>& groups,
                       const std::map<Actor, std::string>& names) {
  std::ostringstream os;
  os << "digraph consensus {\n";
  os << "  rankdir=TB;\n  node [style=filled];\n";
  // Stable group -> color map, ordered by group name.
  std::map<std::string, std::string> color;
  {
    std::set<std::string> gs;
    for (const auto& [a, g] : groups) gs.insert(g);
    size_t i = 0;
    for (const std::string& g : gs)
      color[g] = kPalette[i++ % (sizeof(kPalette) / sizeof(kPalette[0]))];
  }
  for (Actor a : consensus.actors) {
    std::string label = names.count(a) ? names.at(a) : std::to_string(a);
    std::string fill = groups.count(a) ? color[groups.at(a)] : "white";
    os << "  n" << a << " [label=" << dot_quote(label) << ", fillcolor=" << dot_quote(fill)
       << "];\n";
  }
  auto is_strong = [&](const Edge& e) {
    return std::find(consensus.strong_display.begin(), consensus.strong_display.end(), e) !=
           consensus.strong_display.end();
  };
  for (const Edge& e : consensus.weak_display) {
    os << "  n" << consensus.actors[e.from] << " -> n" << consensus.actors[e.to];
    os << (is_strong(e) ? " [color=red]" : " [color=black]") << ";\n";
  }
  // Strong edges pruned from the weak display still deserve their color.
  for (const Edge& e : consensus.strong_display) {
    if (std::find(consensus.weak_display.begin(), consensus.weak_display.end(), e) !=
        consensus.weak_display.end())
      continue;
    os << "  n" << consensus.actors[e.from] << " -> n" << consensus.actors[e.to]
       << " [color=red];\n";
  }
  os << "}\n";
  return os.str();
}

std::string marginals_csv(const EdgeMarginals& marg) {
  std::ostringstream os;
  os << "from,to,marginal\n";
  for (int i = 0; i < marg.n; ++i)
    for (int j = 0; j < marg.n; ++j) {
      if (i == j) continue;
      os << marg.actors[i] << ',' << marg.actors[j] << ',' << marg.at(i, j) << "\n";
    }
  return os.str();
}

std::string rank_table_csv(const std::map<std::string, GroupRank>& ranks) {
  std::ostringstream os;
  os << "group,mean_rank,std_err\n";
  for (const auto& [g, r] : ranks) os << g << ',' << r.mean << ',' << r.std_err << "\n";
  return os.str();
}

std::string depth_histogram_csv(const std::vector<double>& hist) {
  std::ostringstream os;
  os << "depth,mass\n";
  for (size_t d = 0; d < hist.size(); ++d) os << (d + 1) << ',' << hist[d] << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Misc

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path partial = path.string() + ".partial";
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw Error("cannot open " + partial.string());
    out << content;
  }
  std::filesystem::rename(partial, path);
}

} // namespace vsp
