#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "test_support.hpp"

using namespace dwellopt;
using namespace dwellopt::moea;
using namespace dwellopt::testing;

namespace {

ObjectivePair op(double c, double s) { return {c, s, 0.0}; }

// Tiny two-dwell problem: CTV_HR coverage against a hot-spot limit.
struct Toy {
  PatientCase c = minimal_case(2);
  ProtocolConfig protocol;
  std::unique_ptr<PlanEvaluator> ev;

  Toy() {
    protocol.aims.push_back({"cov", {DviKind::D_v, RoiName::CTV_HR, {}, 0.9, false, Direction::maximize}, AimGroup::coverage,
                             AimProtocol::embrace, 1, 100.0, 100.0, false});
    protocol.aims.push_back({"hot", {DviKind::D_v, RoiName::CTV_HR, {}, 0.1, false, Direction::minimize}, AimGroup::sparing,
                             AimProtocol::embrace, 1, 150.0, 150.0, false});
    PlanEvaluator::Options o;
    o.n_dc_points = 200;
    ev = std::make_unique<PlanEvaluator>(c, protocol, initial_aim_state(protocol), o);
  }
};

struct Phantom {
  PatientCase c = generate_phantom(phantom_preset("medium"), 1);
  ProtocolConfig protocol = default_protocol();
  std::unique_ptr<PlanEvaluator> ev;
  LinkageTree tree = build_linkage_tree(c);

  Phantom() {
    PlanEvaluator::Options o;
    o.n_dc_points = 300;
    ev = std::make_unique<PlanEvaluator>(c, protocol, initial_aim_state(protocol), o);
  }
};

const Phantom& phantom() {
  static const Phantom p;
  return p;
}

OptimizerConfig small_config(std::uint64_t seed = 3) {
  OptimizerConfig cfg;
  cfg.population_size = 24;
  cfg.n_clusters = 3;
  cfg.seed = seed;
  return cfg;
}

bool mutually_non_dominated(const ElitistArchive& a) {
  const auto& m = a.members();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j)
      if (i != j && dominates(m[i].solution.objectives, m[j].solution.objectives)) return false;
  return true;
}

// Average linkage computed from the raw point lists of each cluster.
std::vector<std::set<std::size_t>> upgma_oracle(const std::vector<Vec3>& pts) {
  std::vector<std::vector<std::size_t>> active;
  for (std::size_t i = 0; i < pts.size(); ++i) active.push_back({i});
  std::vector<std::set<std::size_t>> merged;
  while (active.size() > 1) {
    double best = 1e300;
    std::size_t ba = 0, bb = 1;
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        double s = 0.0;
        for (std::size_t p : active[x])
          for (std::size_t q : active[y]) s += distance(pts[p], pts[q]);
        s /= static_cast<double>(active[x].size() * active[y].size());
        if (s < best) {
          best = s;
          ba = x;
          bb = y;
        }
      }
    auto joined = active[ba];
    joined.insert(joined.end(), active[bb].begin(), active[bb].end());
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bb));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(ba));
    active.push_back(joined);
    if (active.size() > 1) merged.emplace_back(joined.begin(), joined.end());
  }
  return merged;
}

}  // namespace

TEST(Dominance, Basics) {
  EXPECT_TRUE(dominates(op(1, 1), op(0, 1)));
  EXPECT_FALSE(dominates(op(1, 1), op(1, 1)));
  EXPECT_FALSE(dominates(op(2, 0), op(0, 2)));
  const std::vector<ObjectivePair> pts{op(3, 1), op(2, 2), op(1, 3), op(2, 0.5), op(1, 1.5), op(0.5, 2.5)};
  EXPECT_EQ(non_dominated_ranks(pts), (std::vector<int>{0, 0, 0, 1, 1, 1}));
}

TEST(Selection, SizesAndFronts) {
  EXPECT_EQ(selection_size(96, 0.35), 33u);
  const std::vector<ObjectivePair> same(96, op(1, 1));
  const auto chosen = select(same, 0.35);
  ASSERT_EQ(chosen.size(), 33u);
  for (std::size_t i = 0; i < 33; ++i) EXPECT_EQ(chosen[i], i);

  const std::vector<ObjectivePair> pts{op(2, 0.5), op(3, 1), op(1, 1.5), op(2, 2), op(0.5, 2.5), op(1, 3)};
  const auto half = select(pts, 0.5);
  EXPECT_EQ(std::set<std::size_t>(half.begin(), half.end()), (std::set<std::size_t>{1, 3, 5}));
  const auto four = select(pts, 0.67);
  ASSERT_EQ(four.size(), 4u);
  EXPECT_EQ(std::set<std::size_t>(four.begin(), four.begin() + 3), (std::set<std::size_t>{1, 3, 5}));
  EXPECT_EQ(four[3], 0u);  // boundary of front 1, lowest index among the infinite crowding distances
}

TEST(Clustering, BalancedOverlappingClusters) {
  Rng rng(1);
  std::vector<ObjectivePair> pts;
  for (int i = 0; i < 33; ++i) {
    const double x = rng.uniform();
    pts.push_back(op(x, 1.0 - x * x + 0.05 * rng.uniform()));
  }
  const auto cl = cluster_selection(pts, 5);
  ASSERT_EQ(cl.size(), 5u);
  for (const auto& c : cl) EXPECT_EQ(c.members.size(), 14u);
  EXPECT_EQ(cl[0].role, ClusterRole::extreme_lci);
  EXPECT_EQ(cl[1].role, ClusterRole::extreme_lsi);
  for (std::size_t k = 2; k < 5; ++k) EXPECT_EQ(cl[k].role, ClusterRole::middle);
  const auto best_c = std::max_element(pts.begin(), pts.end(), [](auto a, auto b) { return a.lci < b.lci; }) - pts.begin();
  EXPECT_TRUE(std::count(cl[0].members.begin(), cl[0].members.end(), static_cast<std::size_t>(best_c)));

  const auto one = cluster_selection(pts, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].members.size(), 33u);
  EXPECT_EQ(one[0].role, ClusterRole::middle);

  EXPECT_THROW(cluster_selection(pts, 0), ContractError);
  EXPECT_THROW(cluster_selection(std::vector<ObjectivePair>(2, op(0, 0)), 3), ContractError);
}

TEST(Clustering, CollinearPointsGiveContiguousSegments) {
  std::vector<ObjectivePair> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(op(i, -i));
  for (const auto& c : cluster_selection(pts, 4)) {
    ASSERT_EQ(c.members.size(), 10u);
    for (std::size_t k = 1; k < c.members.size(); ++k) EXPECT_EQ(c.members[k], c.members[k - 1] + 1);
  }
}

TEST(Clustering, DegenerateObjectivesUseRoundRobinBlocks) {
  const auto cl = cluster_selection(std::vector<ObjectivePair>(10, op(1, 1)), 3);
  for (const auto& c : cl) EXPECT_EQ(c.members.size(), 7u);
}

TEST(LinkageTree, SmallCases) {
  const std::vector<Vec3> one{{0, 0, 0}};
  EXPECT_EQ(build_linkage_tree(one).sets, (std::vector<std::vector<std::size_t>>{{0}}));
  const std::vector<Vec3> line{{0, 0, 0}, {1, 0, 0}, {10, 0, 0}, {11, 0, 0}};
  const auto t = build_linkage_tree(line);
  ASSERT_EQ(t.size(), 6u);  // 4 leaves + 2 merges, root excluded
  EXPECT_EQ(t.sets[4], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(t.sets[5], (std::vector<std::size_t>{2, 3}));
  EXPECT_THROW(build_linkage_tree(std::vector<Vec3>{}), ContractError);
}

TEST(LinkageTree, MatchesAverageLinkageOracle) {
  Rng rng(77);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<Vec3> pts(15 + rep * 5);
    for (auto& p : pts) p = {rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-30, 30)};
    const auto tree = build_linkage_tree(pts);
    const auto oracle = upgma_oracle(pts);
    ASSERT_EQ(tree.size(), pts.size() + oracle.size());
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      const auto& s = tree.sets[pts.size() + k];
      EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()), oracle[k]);
    }
  }
}

TEST(Distribution, TwoMemberVarianceUsesDivisorN) {
  const std::vector<double> a{1.0, 5.0}, b{3.0, 5.0};
  const std::vector<const std::vector<double>*> samples{&a, &b};
  const std::vector<std::size_t> first{0};
  const auto d = estimate_set(samples, first);
  EXPECT_DOUBLE_EQ(d.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(d.covariance(0, 0), 1.0);  // (1-3)^2 / 4
  EXPECT_EQ(d.regularization, 0.0);
}

TEST(Distribution, IdenticalMembersAreRegularized) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<const std::vector<double>*> samples{&a, &a, &a};
  const std::vector<std::size_t> all{0, 1, 2};
  const auto d = estimate_set(samples, all);
  EXPECT_GT(d.regularization, 0.0);
  EXPECT_TRUE((d.cholesky.diagonal().array() > 0.0).all());
  EXPECT_LE((d.cholesky * d.cholesky.transpose() - d.covariance).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Distribution, MatchesTwoPassOracle) {
  Rng rng(8);
  std::vector<std::vector<double>> rows(14);
  for (auto& r : rows) r = random_vector(rng, 6, 0.0, 10.0);
  std::vector<const std::vector<double>*> samples;
  for (const auto& r : rows) samples.push_back(&r);
  const std::vector<std::size_t> idx{0, 2, 3, 5};
  const auto d = estimate_set(samples, idx);
  std::vector<double> mean(idx.size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t a = 0; a < idx.size(); ++a) mean[a] += r[idx[a]] / 14.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    EXPECT_NEAR(d.mean[static_cast<Eigen::Index>(a)], mean[a], 1e-12);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      double cov = 0.0;
      for (const auto& r : rows) cov += (r[idx[a]] - mean[a]) * (r[idx[b]] - mean[b]) / 14.0;
      EXPECT_NEAR(d.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)), cov, 1e-12);
    }
  }
}

TEST(Distribution, SamplesFollowTheModel) {
  SetDistribution d;
  d.mean = Eigen::Vector2d(1.0, -2.0);
  d.covariance = (Eigen::Matrix2d() << 4.0, 1.0, 1.0, 2.0).finished();
  d.cholesky = d.covariance.llt().matrixL();
  Rng rng(4);
  Eigen::VectorXd x, sum = Eigen::Vector2d::Zero();
  Eigen::MatrixXd sq = Eigen::Matrix2d::Zero();
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    sample_set(d, rng, x, 2.0);
    sum += x;
    sq += (x - d.mean) * (x - d.mean).transpose();
  }
  EXPECT_LE((sum / n - d.mean).cwiseAbs().maxCoeff(), 0.03);
  EXPECT_LE((sq / n - 2.0 * d.covariance).cwiseAbs().maxCoeff(), 0.1);
  EXPECT_NEAR(standardized_distance(d, d.mean + d.cholesky * Eigen::Vector2d(0.5, -1.5)), 1.5, 1e-12);
}

TEST(Archive, AcceptRejectAndDuplicates) {
  ElitistArchive a(10);
  Solution s;
  s.objectives = op(1, 1);
  EXPECT_TRUE(a.update(s));
  EXPECT_FALSE(a.update(s));  // duplicate
  s.objectives = op(0.5, 0.5);
  EXPECT_FALSE(a.update(s));
  EXPECT_EQ(a.size(), 1u);
  s.objectives = op(2, 0);
  EXPECT_TRUE(a.update(s));
  s.objectives = op(2, 2);
  EXPECT_TRUE(a.update(s));
  EXPECT_EQ(a.size(), 1u);
  s.objectives = op(5, 5);
  s.cr_feasible = false;
  EXPECT_FALSE(a.update(s));
  EXPECT_THROW(ElitistArchive(0), ConfigError);
}

TEST(Archive, TenThousandInsertionsStayBoundedAndNonDominated) {
  ElitistArchive a(1000);
  Rng rng(12);
  Solution s;
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    s.objectives = op(x, std::sqrt(1.0 - x * x) - 0.01 * rng.uniform());
    a.update(s);
    if (i % 997 == 0) {
      ASSERT_TRUE(mutually_non_dominated(a));
    }
  }
  EXPECT_LE(a.size(), 1000u);
  EXPECT_GT(a.size(), 500u);
  EXPECT_TRUE(mutually_non_dominated(a));
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a.members()[i - 1].solution.objectives.lci, a.members()[i].solution.objectives.lci);
}

TEST(Archive, OverflowKeepsExtremes) {
  ElitistArchive a(20);
  Solution s;
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    s.objectives = op(x, 1.0 - x);
    a.update(s);
  }
  EXPECT_EQ(a.size(), 20u);
  EXPECT_EQ(a.members().front().solution.objectives.lci, 0.0);
  EXPECT_EQ(a.members().back().solution.objectives.lci, 1.0);
}

TEST(Init, PopulationWithinRangeAndReproducible) {
  const auto& p = phantom();
  OptimizerConfig cfg;
  Rng r1(5), r2(5);
  const auto a = init_population(cfg, *p.ev, r1);
  const auto b = init_population(cfg, *p.ev, r2);
  ASSERT_EQ(a.size(), 96u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].dwell_times, b[i].dwell_times);
    EXPECT_TRUE(a[i].cr_feasible);
    for (double t : a[i].dwell_times) {
      EXPECT_GE(t, 0.0);
      EXPECT_LE(t, 2.0);
    }
  }
}

TEST(Gom, ZeroSpreadSampleIsANoOp) {
  const auto& p = phantom();
  Rng rng(1);
  auto pop = init_population(small_config(), *p.ev, rng);
  Solution s = pop[0];
  ClusterModel m;
  for (const auto& set : p.tree.sets) {
    SetDistribution d;
    d.mean.resize(static_cast<Eigen::Index>(set.size()));
    for (std::size_t a = 0; a < set.size(); ++a) d.mean[static_cast<Eigen::Index>(a)] = s.dwell_times[set[a]];
    d.covariance = d.cholesky = Eigen::MatrixXd::Zero(d.mean.size(), d.mean.size());
    m.sets.push_back(d);
  }
  ElitistArchive archive;
  GomWorkspace ws;
  std::uint64_t evals = 0;
  EXPECT_EQ(gom_variation(s, m, ClusterRole::middle, p.tree, *p.ev, archive, rng, 60.0, ws, &evals), 0u);
  EXPECT_EQ(evals, 0u);
  EXPECT_EQ(s.dwell_times, pop[0].dwell_times);
}

TEST(Gom, CatheterViolatingChangesAreReverted) {
  const auto& p = phantom();
  ASSERT_FALSE(p.ev->needle_groups().empty());
  Rng rng(2);
  Solution s = init_population(small_config(), *p.ev, rng)[0];
  const Solution before = s;
  // Push a whole needle to dominate the plan.
  const auto& needle = p.ev->needle_groups().front();
  std::vector<double> old;
  for (std::size_t j : needle) {
    old.push_back(s.dwell_times[j]);
    s.dwell_times[j] = 60.0;
  }
  ElitistArchive archive;
  GomWorkspace ws;
  const auto out = moea::detail::settle_change(s, needle, old, ClusterRole::extreme_lci, *p.ev, archive, ws, nullptr);
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(s.dwell_times, before.dwell_times);
  EXPECT_EQ(s.objectives, before.objectives);
  EXPECT_TRUE(archive.empty());
}

TEST(Gom, RejectedChangeRestoresEvaluationExactly) {
  const auto& p = phantom();
  Rng rng(3);
  Solution s = init_population(small_config(), *p.ev, rng)[0];
  const Solution before = s;
  const std::vector<std::size_t> changed{0};
  const std::vector<double> old{s.dwell_times[0]};
  s.dwell_times[0] = 0.0;  // less dose never raises coverage
  ElitistArchive archive;
  GomWorkspace ws;
  Solution probe = before;
  probe.dwell_times[0] = 0.0;
  p.ev->evaluate(probe);
  if (probe.objectives.lci > before.objectives.lci) GTEST_SKIP() << "DTMR made the reduction an improvement";
  const auto out = moea::detail::settle_change(s, changed, old, ClusterRole::extreme_lci, *p.ev, archive, ws, nullptr);
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(s.dwell_times, before.dwell_times);
  EXPECT_EQ(s.dvi_values, before.dvi_values);
  for (std::size_t r = 0; r < s.dose.size(); ++r) EXPECT_EQ(s.dose[r], before.dose[r]);
}

// Middle clusters may trade one objective for the other, so only the extreme
// roles are monotone.
TEST(Gom, ToyProblemNeverGetsWorseUnderItsRole) {
  Toy toy;
  const auto tree = build_linkage_tree(toy.c);
  OptimizerConfig cfg;
  cfg.population_size = 10;
  cfg.n_clusters = 1;
  cfg.selection_fraction = 0.5;
  Rng rng(9);
  auto pop = init_population(cfg, *toy.ev, rng);
  std::vector<const std::vector<double>*> samples;
  for (const auto& s : pop) samples.push_back(&s.dwell_times);
  const auto model = estimate_distributions(samples, tree);
  ElitistArchive archive;
  GomWorkspace ws;
  for (ClusterRole role : {ClusterRole::extreme_lci, ClusterRole::extreme_lsi, ClusterRole::middle}) {
    for (auto s : pop) {
      const auto start = s.objectives;
      for (int rep = 0; rep < 5; ++rep) gom_variation(s, model, role, tree, *toy.ev, archive, rng, 60.0, ws);
      Solution fresh = toy.ev->make_solution(s.dwell_times);
      EXPECT_NEAR(fresh.objectives.lci, s.objectives.lci, 1e-9);
      EXPECT_NEAR(fresh.objectives.lsi, s.objectives.lsi, 1e-9);
      if (role == ClusterRole::extreme_lci) {
        EXPECT_GE(s.objectives.lci, start.lci);
      }
      if (role == ClusterRole::extreme_lsi) {
        EXPECT_GE(s.objectives.lsi, start.lsi);
      }
    }
  }
}

TEST(Run, ZeroGenerationsLeaveTheArchiveAlone) {
  const auto& p = phantom();
  auto st = init_state(small_config(), *p.ev, p.tree);
  const auto before = st.archive.members().size();
  run_generations(st, *p.ev, 0);
  EXPECT_EQ(st.archive.members().size(), before);
  EXPECT_EQ(st.generation, 0u);
}

TEST(Run, SplitRunsEqualOneRunAndBestLciNeverDrops) {
  const auto& p = phantom();
  for (bool scaling : {true, false}) {
    auto cfg = small_config(11);
    cfg.scaling.enabled = scaling;
    auto a = init_state(cfg, *p.ev, p.tree);
    auto b = init_state(cfg, *p.ev, p.tree);
    run_generations(a, *p.ev, 3);
    run_generations(a, *p.ev, 4);
    run_generations(b, *p.ev, 7);
    EXPECT_EQ(a.generation, 7u);
    EXPECT_EQ(a.evaluations, b.evaluations);
    EXPECT_TRUE(a.rng == b.rng);
    ASSERT_EQ(a.archive.size(), b.archive.size());
    for (std::size_t i = 0; i < a.archive.size(); ++i)
      EXPECT_EQ(a.archive.members()[i].solution.dwell_times, b.archive.members()[i].solution.dwell_times);
    for (std::size_t i = 0; i < a.population.size(); ++i) EXPECT_EQ(a.population[i].dwell_times, b.population[i].dwell_times);
    EXPECT_EQ(a.best_lci_trace, b.best_lci_trace);
    for (std::size_t g = 1; g < a.best_lci_trace.size(); ++g) EXPECT_GE(a.best_lci_trace[g], a.best_lci_trace[g - 1]);
    for (std::size_t g = 1; g < a.best_balanced_trace.size(); ++g) EXPECT_GE(a.best_balanced_trace[g], a.best_balanced_trace[g - 1]);
    EXPECT_TRUE(mutually_non_dominated(a.archive));
    for (const auto& e : a.archive.members()) EXPECT_TRUE(e.solution.cr_feasible);
    if (scaling) {
      EXPECT_EQ(a.clusters.size(), cfg.n_clusters);
    } else {
      EXPECT_TRUE(a.clusters.empty());
    }
  }
}

TEST(VarianceScaling, MultiplierRule) {
  VarianceScalingConfig cfg;
  ClusterModel model;
  SetDistribution d;
  d.mean = Eigen::VectorXd::Zero(1);
  d.covariance = d.cholesky = Eigen::MatrixXd::Identity(1, 1);
  model.sets = {d, d};
  LinkageTree tree{{{0}, {1}}};
  ClusterMemory m;
  m.multipliers = {1.0, 1.0};
  SetImprovements imp;
  imp.reset(tree);
  imp.count[0] = 1;
  imp.sum[0][0] = 3.0;  // three standard deviations away: widen
  moea::detail::update_multipliers(m, model, imp, cfg);
  EXPECT_DOUBLE_EQ(m.multipliers[0], cfg.increase);
  EXPECT_DOUBLE_EQ(m.multipliers[1], 1.0);
  EXPECT_EQ(m.stall, 0u);

  imp.reset(tree);
  for (std::size_t g = 0; g < cfg.max_stall + 3; ++g) moea::detail::update_multipliers(m, model, imp, cfg);
  EXPECT_LT(m.multipliers[1], 1.0);  // shrinks only after a long stall
  EXPECT_GE(m.stall, cfg.max_stall);

  VarianceScalingConfig bad;
  bad.decrease = 1.5;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Checkpoint, RoundTripPreservesState) {
  const auto& p = phantom();
  auto st = init_state(small_config(4), *p.ev, p.tree);
  run_generations(st, *p.ev, 3);
  const auto path = std::filesystem::temp_directory_path() / "dwellopt_tests_checkpoint.json";
  save_checkpoint(st, path);
  const auto back = load_checkpoint(path, *p.ev);
  EXPECT_EQ(checkpoint_to_json(back), checkpoint_to_json(st));
  EXPECT_EQ(config_to_json(back.config), config_to_json(st.config));
  auto resumed = back;
  run_generations(resumed, *p.ev, 2);
  EXPECT_EQ(resumed.generation, 5u);
  EXPECT_TRUE(mutually_non_dominated(resumed.archive));
  std::filesystem::remove(path);

  auto j = checkpoint_to_json(st);
  j["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(j, *p.ev), ParseError);
  j = checkpoint_to_json(st);
  j.erase("rng");
  EXPECT_THROW(checkpoint_from_json(j, *p.ev), ParseError);
}

TEST(Config, Validation) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_clusters = 40;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.init_hi = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
