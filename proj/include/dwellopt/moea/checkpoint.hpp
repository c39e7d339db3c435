#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "dwellopt/atomic_file.hpp"
#include "dwellopt/case_io.hpp"
#include "dwellopt/moea/gomea.hpp"

namespace dwellopt::moea {

inline constexpr int kCheckpointVersion = 1;

inline json config_to_json(const OptimizerConfig& c) {
  return json{{"population_size", c.population_size}, {"selection_fraction", c.selection_fraction}, {"n_clusters", c.n_clusters},
              {"archive_capacity", c.archive_capacity}, {"init_lo", c.init_lo}, {"init_hi", c.init_hi},
              {"t_max", c.t_max}, {"seed", c.seed}, {"init_retries", c.init_retries},
              {"scaling", json{{"enabled", c.scaling.enabled}, {"increase", c.scaling.increase}, {"decrease", c.scaling.decrease},
                               {"sdr_threshold", c.scaling.sdr_threshold}, {"max_stall", c.scaling.max_stall},
                               {"shift_fraction", c.scaling.shift_fraction}, {"shift_step", c.scaling.shift_step}}}};
}

inline OptimizerConfig config_from_json(const json& j) {
  OptimizerConfig c;
  c.population_size = j.at("population_size").get<std::size_t>();
  c.selection_fraction = j.at("selection_fraction").get<double>();
  c.n_clusters = j.at("n_clusters").get<std::size_t>();
  c.archive_capacity = j.at("archive_capacity").get<std::size_t>();
  c.init_lo = j.at("init_lo").get<double>();
  c.init_hi = j.at("init_hi").get<double>();
  c.t_max = j.at("t_max").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.init_retries = j.at("init_retries").get<std::size_t>();
  const auto& v = j.at("scaling");
  c.scaling.enabled = v.at("enabled").get<bool>();
  c.scaling.increase = v.at("increase").get<double>();
  c.scaling.decrease = v.at("decrease").get<double>();
  c.scaling.sdr_threshold = v.at("sdr_threshold").get<double>();
  c.scaling.max_stall = v.at("max_stall").get<std::size_t>();
  c.scaling.shift_fraction = v.at("shift_fraction").get<double>();
  c.scaling.shift_step = v.at("shift_step").get<double>();
  c.validate();
  return c;
}

/// Serializes the resumable state. Dose caches are not stored; loading
/// re-evaluates every plan, so a resumed run matches an uninterrupted one to
/// within floating-point rounding of the incremental dose updates.
inline json checkpoint_to_json(const OptimizerState& st) {
  json j;
  j["version"] = kCheckpointVersion;
  j["config"] = config_to_json(st.config);
  j["generation"] = st.generation;
  j["evaluations"] = st.evaluations;
  j["rng"] = st.rng.save_state();
  j["linkage_sets"] = st.tree.sets;
  json pop = json::array();
  for (const auto& s : st.population) pop.push_back(s.dwell_times);
  j["population"] = std::move(pop);
  json arc = json::array();
  for (const auto& e : st.archive.members()) arc.push_back(json{{"sequence", e.sequence}, {"dwell_times", e.solution.dwell_times}});
  j["archive"] = std::move(arc);
  j["archive_next_sequence"] = st.archive.next_sequence();
  j["best_lci_trace"] = st.best_lci_trace;
  j["best_balanced_trace"] = st.best_balanced_trace;
  json mem = json::array();
  for (const auto& m : st.clusters)
    mem.push_back(json{{"role", static_cast<int>(m.role)}, {"mean_lci", m.mean_objectives.lci}, {"mean_lsi", m.mean_objectives.lsi},
                       {"mean_times", m.mean_times}, {"multipliers", m.multipliers}, {"stall", m.stall}});
  j["clusters"] = std::move(mem);
  return j;
}

inline OptimizerState checkpoint_from_json(const json& j, const PlanEvaluator& ev) {
  try {
    if (j.at("version").get<int>() != kCheckpointVersion) throw ParseError("checkpoint: unsupported version");
    OptimizerState st;
    st.config = config_from_json(j.at("config"));
    st.generation = j.at("generation").get<std::size_t>();
    st.evaluations = j.at("evaluations").get<std::uint64_t>();
    st.rng.restore_state(j.at("rng").get<std::string>());
    st.tree.sets = j.at("linkage_sets").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& t : j.at("population")) st.population.push_back(ev.make_solution(t.get<std::vector<double>>()));
    std::vector<ArchiveEntry> members;
    for (const auto& e : j.at("archive"))
      members.push_back({ev.make_solution(e.at("dwell_times").get<std::vector<double>>()).summary(), e.at("sequence").get<std::uint64_t>()});
    st.archive = ElitistArchive(st.config.archive_capacity);
    st.archive.restore(std::move(members), j.at("archive_next_sequence").get<std::uint64_t>());
    st.best_lci_trace = j.at("best_lci_trace").get<std::vector<double>>();
    st.best_balanced_trace = j.at("best_balanced_trace").get<std::vector<double>>();
    for (const auto& m : j.at("clusters")) {
      ClusterMemory cm;
      const int role = m.at("role").get<int>();
      if (role < 0 || role > static_cast<int>(ClusterRole::middle)) throw ParseError("checkpoint: unknown cluster role");
      cm.role = static_cast<ClusterRole>(role);
      cm.mean_objectives = {m.at("mean_lci").get<double>(), m.at("mean_lsi").get<double>()};
      cm.mean_times = m.at("mean_times").get<std::vector<double>>();
      cm.multipliers = m.at("multipliers").get<std::vector<double>>();
      cm.stall = m.at("stall").get<std::size_t>();
      st.clusters.push_back(std::move(cm));
    }
    for (const auto& set : st.tree.sets)
      for (std::size_t d : set)
        if (d >= ev.n_dwells()) throw ParseError("checkpoint: linkage set refers to dwell " + std::to_string(d));
    return st;
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const OptimizerState& st, const std::filesystem::path& path) {
  write_file_atomic(path, checkpoint_to_json(st).dump() + "\n");
}

inline OptimizerState load_checkpoint(const std::filesystem::path& path, const PlanEvaluator& ev) {
  return checkpoint_from_json(io::parse_document(io::read_text(path), path.string()), ev);
}

}  // namespace dwellopt::moea
