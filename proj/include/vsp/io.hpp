#ifndef VSP_IO_HPP
#define VSP_IO_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsp/analysis.hpp"
#include "vsp/mcmc.hpp"
#include "vsp/observation.hpp"
#include "vsp/poset.hpp"
#include "vsp/prior.hpp"
#include "vsp/tree.hpp"

namespace vsp {

using Json = nlohmann::json;

// --- trees and partial orders -----------------------------------------------

Json mdt_to_json(const Mdt& m);
Mdt mdt_from_json(const Json& j);
Json bdt_to_json(const Bdt& t);
Bdt bdt_from_json(const Json& j);
Json partial_order_to_json(const PartialOrder& po);
PartialOrder partial_order_from_json(const Json& j);

// Dispatches on the "kind" field: "bdt", "mdt" or "partial_order".
Mdt tree_file_to_mdt(const std::filesystem::path& path);

// --- datasets ---------------------------------------------------------------

Json dataset_to_json(const RankDataset& ds);
RankDataset dataset_from_json(const Json& j);
RankDataset parse_dataset(const std::filesystem::path& path);
void write_dataset(const RankDataset& ds, const std::filesystem::path& path);

// Drop actors appearing in fewer than k lists (and then empty lists).
RankDataset filter_lpa(const RankDataset& ds, int k);

// --- run configuration -------------------------------------------------------

struct RunConfig {
  McmcConfig mcmc;
  HyperPriorSpec priors;
  std::string input;
  std::string out_dir;
};

RunConfig run_config_from_json(const Json& j); // unknown keys rejected
Json run_config_to_json(const RunConfig& cfg);
RunConfig parse_run_config(const std::filesystem::path& path);

// --- traces -------------------------------------------------------------------

// JSON lines: header record, one record per retained sample, footer with
// acceptance counters. Writes are atomic (".partial" then rename).
void write_trace(const ChainTrace& trace, const std::filesystem::path& path);
ChainTrace read_trace(const std::filesystem::path& path);
// Truncation-tolerant read: valid prefix samples are returned.
ChainTrace read_trace_prefix(const std::filesystem::path& path, bool* truncated);

class TraceWriter {
public:
  TraceWriter(const std::filesystem::path& path, const McmcConfig& cfg,
              const std::vector<Actor>& actors, const std::string& data_hash);
  void append(const TraceSample& s);
  void finish(const AcceptStats& accept); // writes footer and renames
  ~TraceWriter();

private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  FILE* f_ = nullptr;
  bool finished_ = false;
};

// --- exports -----------------------------------------------------------------

std::string export_dot(const ConsensusOrder& consensus,
                       const std::map<Actor, std::string>& groups,
                       const std::map<Actor, std::string>& names = {});

std::string marginals_csv(const EdgeMarginals& marg);
std::string rank_table_csv(const std::map<std::string, GroupRank>& ranks);
std::string depth_histogram_csv(const std::vector<double>& hist);

// --- misc --------------------------------------------------------------------

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

} // namespace vsp

#endif
