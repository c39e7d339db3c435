#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "test_support.hpp"

using namespace dwellopt;
using dwellopt::testing::minimal_case;

namespace {

const PatientCase& default_phantom() {
  static const PatientCase c = generate_phantom(phantom_preset("default"), 1);
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dwellopt_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Phantom, DefaultHasAboutEightyDwellsAndAllRois) {
  const auto& c = default_phantom();
  EXPECT_GE(c.n_dwells(), 70u);
  EXPECT_LE(c.n_dwells(), 90u);
  for (RoiName n : kAllRoiNames) EXPECT_NE(c.find_roi(n), nullptr) << to_string(n);
  EXPECT_NE(c.find_point(kIcruRectovaginal), nullptr);
  EXPECT_NO_THROW(validate(c));
}

TEST(Phantom, TandemDwellsAreUniformlySpaced) {
  const auto& c = default_phantom();
  const Channel* tandem = nullptr;
  for (const auto& ch : c.channels)
    if (ch.kind == ChannelKind::intracavitary_tandem) tandem = &ch;
  ASSERT_NE(tandem, nullptr);
  ASSERT_GE(tandem->dwell_ids.size(), 3u);
  std::vector<double> s;
  for (int id : tandem->dwell_ids) s.push_back(dot(c.dwell_positions[c.dwell_index(id)].position - c.applicator_axis.origin, c.applicator_axis.direction));
  const double step = s[1] - s[0];
  for (std::size_t k = 2; k < s.size(); ++k) EXPECT_NEAR(s[k] - s[k - 1], step, 1e-9);
}

TEST(Phantom, NoNeedlesMeansNoNeedleChannels) {
  auto spec = phantom_preset("default");
  spec.needles = 0;
  const auto c = generate_phantom(spec, 3);
  for (const auto& ch : c.channels) EXPECT_NE(ch.kind, ChannelKind::needle);
  EXPECT_TRUE(c.needle_groups().empty());
  std::vector<double> plan(c.n_dwells(), 5.0);
  EXPECT_TRUE(check_catheter_contribution(plan, c, ConstraintConfig{}));
}

TEST(Phantom, SeedsChangeOnlyNeedleJitter) {
  const auto a = generate_phantom(phantom_preset("default"), 1);
  const auto b = generate_phantom(phantom_preset("default"), 2);
  ASSERT_EQ(a.rois.size(), b.rois.size());
  for (std::size_t i = 0; i < a.rois.size(); ++i) {
    const auto& ra = a.rois[i];
    const auto& rb = b.rois[i];
    EXPECT_EQ(ra.name, rb.name);
    // Parent primitives are seed independent; applicator exclusions move with the needles.
    EXPECT_EQ(ra.shape.include, rb.shape.include) << to_string(ra.name);
  }
  bool needle_moved = false;
  for (std::size_t j = 0; j < a.n_dwells(); ++j) {
    const auto& ch = a.channels[static_cast<std::size_t>(a.dwell_positions[j].channel_id)];
    const bool same = a.dwell_positions[j].position == b.dwell_positions[j].position;
    if (ch.kind == ChannelKind::needle)
      needle_moved = needle_moved || !same;
    else
      EXPECT_TRUE(same);
  }
  EXPECT_TRUE(needle_moved);
}

TEST(Phantom, GenerationIsReproducible) {
  const auto a = generate_phantom(phantom_preset("medium"), 7);
  const auto b = generate_phantom(phantom_preset("medium"), 7);
  EXPECT_EQ(case_to_string(a), case_to_string(b));
}

TEST(Phantom, UnknownPresetIsAConfigError) { EXPECT_THROW(phantom_preset("nonsense"), ConfigError); }

TEST(Phantom, OverlappingRoiAndDwellIsRejected) {
  auto spec = phantom_preset("easy");
  spec.bladder = {{0, 0, 10}, {10, 10, 10}};  // swallows the tandem
  EXPECT_THROW(generate_phantom(spec, 1), ConfigError);
}

TEST(Phantom, RoiVolumesMatchMonteCarloWithinOnePercent) {
  const auto& c = default_phantom();
  for (const auto& r : c.rois) {
    const double mc = monte_carlo_volume_mm3(r.shape, 1'000'000, 12345) / 1000.0;
    EXPECT_NEAR(mc, r.volume_cm3, 0.01 * r.volume_cm3) << to_string(r.name);
  }
}

TEST(DcPoints, ExactCountInsideAndReproducible) {
  const auto& c = default_phantom();
  for (RoiName n : kAllRoiNames) {
    const auto set = sample_dc_points(c, n, 2500, 9);
    ASSERT_EQ(set.points.size(), 2500u);
    for (const auto& p : set.points) ASSERT_TRUE(c.roi(n).shape.contains(p)) << to_string(n);
    const auto again = sample_dc_points(c, n, 2500, 9);
    EXPECT_EQ(set.points.size(), again.points.size());
    for (std::size_t i = 0; i < set.points.size(); ++i) ASSERT_EQ(set.points[i], again.points[i]);
  }
}

TEST(DcPoints, BoxRoiStaysWithinBounds) {
  const auto c = minimal_case();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const auto& p : sample_dc_points(c, RoiName::CTV_HR, 1000, seed).points) {
      EXPECT_GE(p.x, 15.0);
      EXPECT_LT(p.x, 25.0);
      EXPECT_GE(p.y, -5.0);
      EXPECT_LE(p.y, 5.0);
      EXPECT_GE(p.z, -5.0);
      EXPECT_LE(p.z, 5.0);
    }
  }
}

TEST(DcPoints, UnitBallIsSampledUniformly) {
  auto c = minimal_case();
  Shape ball;
  ball.include.push_back(Ellipsoid{{20.0, 0.0, 0.0}, {1.0, 1.0, 1.0}});
  c.rois = {{RoiName::CTV_HR, RoiKind::target, ball, 4.0 / 3.0 * M_PI / 1000.0}};
  const auto set = sample_dc_points(c, RoiName::CTV_HR, 100000, 4);
  Vec3 mean{};
  std::size_t above = 0;  // half-space z > 0.5: cap fraction (2 - 3h + h^3)/4 with h = 0.5
  for (const auto& p : set.points) {
    mean = mean + (1.0 / 100000.0) * p;
    above += p.z > 0.5 ? 1 : 0;
  }
  EXPECT_NEAR(mean.x, 20.0, 0.02);
  EXPECT_NEAR(mean.y, 0.0, 0.02);
  EXPECT_NEAR(mean.z, 0.0, 0.02);
  const double cap = (2.0 - 1.5 + 0.125) / 4.0;
  EXPECT_NEAR(static_cast<double>(above) / 100000.0, cap, 0.01 * 1.0);
  EXPECT_NEAR(static_cast<double>(above) / 100000.0 / cap, 1.0, 0.03);
}

TEST(DcPoints, ZeroCountIsRejected) { EXPECT_THROW(sample_dc_points(minimal_case(), RoiName::CTV_HR, 0, 1), ContractError); }

TEST(MidTop, RegionsLieInDisjointSlabs) {
  const auto& c = default_phantom();
  const auto slabs = mid_top_slabs(c);
  const auto [ir_lo, ir_hi] = axial_extent(c.roi(RoiName::CTV_IR).shape, c.applicator_axis);
  EXPECT_DOUBLE_EQ(slabs.mid_lo, ir_lo);
  (void)ir_hi;
  auto axial = [&](Vec3 p) { return dot(p - c.applicator_axis.origin, c.applicator_axis.direction); };
  for (RoiName n : {RoiName::mid_CTV_IR, RoiName::mid_normal_tissue})
    for (const auto& p : sample_dc_points(c, n, 3000, 2).points) {
      EXPECT_GE(axial(p), slabs.mid_lo);
      EXPECT_LT(axial(p), slabs.mid_hi);
    }
  for (const auto& p : sample_dc_points(c, RoiName::top_normal_tissue, 3000, 2).points) EXPECT_GE(axial(p), slabs.top_lo);
  EXPECT_LE(slabs.mid_hi, slabs.top_lo);
}

TEST(MidTop, CutPlanesAreClosedBelowOpenAbove) {
  const auto& c = default_phantom();
  const auto& mid = c.roi(RoiName::mid_normal_tissue).shape;
  const auto& top = c.roi(RoiName::top_normal_tissue).shape;
  ASSERT_TRUE(mid.slab && top.slab);
  // A point on the mid/top plane: closed below means it belongs to top, not mid.
  const Vec3 on_plane = c.applicator_axis.origin + mid.slab->hi * c.applicator_axis.direction;
  EXPECT_FALSE(mid.slab->contains(on_plane));
  EXPECT_TRUE(top.slab->contains(on_plane));
  // The inferior plane of mid is inside mid's slab.
  const Vec3 lower = c.applicator_axis.origin + mid.slab->lo * c.applicator_axis.direction;
  EXPECT_TRUE(mid.slab->contains(lower));
}

TEST(MidTop, NormalTissueVolumeAccounting) {
  // vol(mid NT) + vol(delineated ROIs within slab and envelope) = vol(slab within envelope).
  const auto& c = default_phantom();
  ASSERT_TRUE(c.normal_tissue_envelope.has_value());
  const auto& mid = c.roi(RoiName::mid_normal_tissue).shape;
  Shape slab_env = *c.normal_tissue_envelope;
  slab_env.slab = mid.slab;
  Shape delineated = slab_env;
  delineated.include.clear();
  delineated.exclude.clear();
  for (RoiName n : {RoiName::CTV_HR, RoiName::CTV_IR, RoiName::GTV_RES, RoiName::bladder, RoiName::rectum, RoiName::sigmoid, RoiName::bowel})
    for (const auto& p : c.roi(n).shape.include) delineated.include.push_back(p);
  // Count delineated points that are also inside the envelope minus applicator.
  Rng rng(77);
  const Aabb box = slab_env.bounds();
  std::size_t in_env = 0, in_nt = 0, in_del = 0;
  for (int i = 0; i < 400000; ++i) {
    const Vec3 p{rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y), rng.uniform(box.lo.z, box.hi.z)};
    if (!slab_env.contains(p)) continue;
    ++in_env;
    if (mid.contains(p)) ++in_nt;
    if (delineated.contains(p)) ++in_del;
  }
  EXPECT_EQ(in_nt + in_del, in_env);
  const double env_cm3 = box.volume() * static_cast<double>(in_env) / 400000.0 / 1000.0;
  const double nt_cm3 = box.volume() * static_cast<double>(in_nt) / 400000.0 / 1000.0;
  EXPECT_NEAR(nt_cm3, c.roi(RoiName::mid_normal_tissue).volume_cm3, 0.02 * c.roi(RoiName::mid_normal_tissue).volume_cm3);
  EXPECT_GT(env_cm3, nt_cm3);
}

TEST(MidTop, MissingParentIsNamed) {
  auto c = minimal_case();
  try {
    split_mid_top(c);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("CTV_IR"), std::string::npos);
  }
}

TEST(CaseIo, RoundTripIsFieldEqual) {
  const auto path = temp_path("roundtrip_case.json");
  save_case(default_phantom(), path);
  const auto loaded = load_case(path);
  EXPECT_EQ(loaded, default_phantom());
}

TEST(CaseIo, MissingPrescribedDoseNamesTheField) {
  auto j = case_to_json(minimal_case());
  j.erase("prescribed_dose_gy");
  try {
    case_from_json(j);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("prescribed_dose_gy"), std::string::npos);
  }
}

TEST(CaseIo, MalformedFileReportsLine) {
  const auto path = temp_path("broken_case.json");
  write_file_atomic(path, "{\n  \"prescribed_dose_gy\": 7,\n  \"channels\": [,\n}\n");
  try {
    load_case(path);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(CaseIo, MissingFileIsAnIoError) { EXPECT_THROW(load_case(temp_path("does_not_exist.json")), IoError); }

TEST(CaseIo, MinimalHandWrittenCaseEvaluatesEndToEnd) {
  const std::string doc = R"({
    "prescribed_dose_gy": 7.0,
    "channels": [{"id": 0, "kind": "intracavitary_tandem", "dwell_ids": [0, 1]}],
    "dwell_positions": [{"id": 0, "channel_id": 0, "position": [0, 0, 0]},
                        {"id": 1, "channel_id": 0, "position": [0, 0, 5]}],
    "rois": [{"name": "CTV_HR", "shape": {"include": [{"type": "box", "center": [20, 0, 0], "half_extents": [5, 5, 5]}]}}],
    "reference_points": [],
    "applicator_axis": {"origin": [0, 0, 0], "direction": [0, 0, 1]}
  })";
  const auto c = case_from_json(json::parse(doc));
  EXPECT_NEAR(c.roi(RoiName::CTV_HR).volume_cm3, 1.0, 1e-9);
  ProtocolConfig p;
  p.aims = {detail::embrace("cov", AimGroup::coverage, detail::d_v(RoiName::CTV_HR, 0.9, Direction::maximize), 50.0),
            detail::embrace("spa", AimGroup::sparing, detail::v_d(RoiName::CTV_HR, 200.0, Direction::minimize), 10.0)};
  PlanEvaluator::Options o;
  o.n_dc_points = 200;
  PlanEvaluator ev(c, p, initial_aim_state(p), o);
  const auto s = ev.make_solution({10.0, 10.0});
  EXPECT_GT(s.dvi_values[0], 0.0);
  EXPECT_TRUE(std::isfinite(s.objectives.lci));
  EXPECT_TRUE(std::isfinite(s.objectives.lsi));
}

TEST(CaseValidation, RejectsStructuralErrors) {
  auto c = minimal_case();
  c.prescribed_dose_gy = 0.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = minimal_case();
  c.channels[0].kind = ChannelKind::needle;
  EXPECT_THROW(validate(c), ValidationError);  // no intracavitary channel
  c = minimal_case();
  c.dwell_positions[1].id = 0;
  EXPECT_THROW(validate(c), ValidationError);
  c = minimal_case();
  c.rois[0].volume_cm3 = 2.0;
  EXPECT_THROW(validate(c), ValidationError);
  c = minimal_case();
  c.rois.push_back(c.rois[0]);
  EXPECT_THROW(validate(c), ValidationError);
}
