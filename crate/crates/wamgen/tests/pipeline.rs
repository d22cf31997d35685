//! Cross-module pipeline checks: config text to spaces, meshes, covers,
//! verification reports, and dump round trips.

use wamgen::asymptotics::{fit_tail, StrategySpec};
use wamgen::config::ExperimentConfig;
use wamgen::covering::{greedy_weighted_cover, WeightTable};
use wamgen::io;
use wamgen::meshgen::{self, box_volume_ratio_alpha};
use wamgen::rng::stream_seed;
use wamgen::spaces::{kernel_profile, FunctionSpace, GridSpec};
use wamgen::verify::{self, verify_mesh};

const CONFIG: &str = "\
[space]
family = chebyshev
d = 1
levels = 3,4

[grid]
max_points = 4000

[strategy.muv]

[strategy.nu]
k = 3
r = 1.5

[run]
seed = 31
";

#[test]
fn config_to_verified_meshes() {
    let config = ExperimentConfig::parse(CONFIG).unwrap();
    let hash = config.hash();
    for &level in &config.space.levels {
        let space = config.space.build(level).unwrap();
        let profile = kernel_profile(&space, &config.grid).unwrap();
        for (si, strategy) in config.strategies.iter().enumerate() {
            let seed = stream_seed(config.seed, wamgen::rng::cell_tag(level, si, 0));
            let mesh =
                wamgen::asymptotics::build_strategy_mesh(&space, &profile, strategy, seed)
                    .unwrap();
            // count rule hypothesis holds with the recorded constants
            match strategy {
                StrategySpec::NuAm { r, .. } => {
                    let g = mesh.rule.get("g").unwrap();
                    let s = mesh.rule.get("covering_size").unwrap();
                    let alpha = mesh.rule.get("alpha").unwrap();
                    assert!((alpha - box_volume_ratio_alpha(1)).abs() < 1e-15);
                    assert!(mesh.m as f64 >= (r + 1.0) * g * s * s.ln() / alpha - 1.0);
                }
                StrategySpec::MuV => {
                    let n = space.dim() as f64;
                    assert_eq!(mesh.m, (25.0 * n * n.ln()).ceil() as usize);
                }
                _ => {}
            }
            let report = verify_mesh(&space, &profile, &mesh, 0.5, None, 5).unwrap();
            assert!(report.passes.all(), "{level} {}: {:?}", mesh.strategy.name(), report.passes);
            assert!(report.c_hat >= 1.0 - 1e-9);

            // dump round trip is bit-exact
            let text = io::format_mesh(&mesh, space.dim(), &hash);
            let parsed = io::parse_mesh(&text).unwrap();
            assert_eq!(parsed.points, mesh.points);
            assert_eq!(io::format_mesh(&parsed.into_mesh(), space.dim(), &hash), text);
        }
    }
}

#[test]
fn mu_mesh_growth_tracks_dimension_for_flat_coherence() {
    // For the exponential family the coherence equals N, so the recorded
    // counts of base-measure meshes grow like N log N: the fitted exponent
    // sits near 1 plus the log-factor drift.
    let levels: Vec<usize> = (2..=9).collect();
    let mut ns = Vec::new();
    let mut ms = Vec::new();
    for &level in &levels {
        let space = FunctionSpace::exponential_cube(1, level).unwrap();
        let profile = kernel_profile(&space, &GridSpec::budget(3_000)).unwrap();
        let mesh = meshgen::build_mu_mesh(&space, &profile, 1.0, 7).unwrap();
        ns.push(space.dim() as f64);
        ms.push(mesh.m as f64);
    }
    let fit = fit_tail(&levels, &ns, &ms, 5).unwrap();
    let oracle: Vec<f64> = ns.iter().map(|n| (25.0 * n * n.ln()).ceil()).collect();
    let expected = fit_tail(&levels, &ns, &oracle, 5).unwrap();
    assert!((fit.slope - expected.slope).abs() < 1e-9);
    assert!(fit.slope > 1.0 && fit.slope < 1.5, "{}", fit.slope);
}

#[test]
fn weighted_cover_feeds_nu_mesh() {
    let space = FunctionSpace::tensor_chebyshev(wamgen::spaces::Domain::sym_box(1), 5).unwrap();
    let profile = kernel_profile(&space, &GridSpec::budget(4_000)).unwrap();
    let eps = 1.0 / (3.0 * profile.r_mu());
    let table = WeightTable::from_space(&space, &profile, eps).unwrap();
    let mut cover = greedy_weighted_cover(&table, eps).unwrap();
    assert!(cover.validate_coverage(&table));
    cover.level = Some(5);
    let mesh = meshgen::build_nu_am_mesh(&space, &profile, 3.0, 1.5, &cover, 9).unwrap();
    assert!(mesh.points.iter().all(|p| space.domain().contains(p)));
    let report = verify_mesh(&space, &profile, &mesh, 0.5, None, 2).unwrap();
    // covering-based bound k/(k-2) = 3
    assert_eq!(report.c_bound_am, Some(3.0));
    assert!(report.c_hat <= 3.0 + 1e-9, "{}", report.c_hat);
    let dump = io::format_cover(&cover, "cafe");
    assert!(dump.contains("# level = 5"));
}

#[test]
fn complex_space_report() {
    let space = FunctionSpace::exponential_cube(1, 2).unwrap();
    let profile = kernel_profile(&space, &GridSpec::budget(3_000)).unwrap();
    let mesh = meshgen::build_muv_mesh(&space, &profile, 3).unwrap();
    let grid = wamgen::spaces::TensorGrid::uniform(space.domain(), &[65]);
    let report = verify_mesh(&space, &profile, &mesh, 0.5, Some(&grid), 8).unwrap();
    assert!(report.gram_deviation <= 0.5, "{}", report.gram_deviation);
    // polygonal relaxation brackets the sup ratio near 1 for dense meshes
    assert!(report.c_hat >= (std::f64::consts::PI / 16.0).cos() - 1e-6);
    let sup = verify::sup_ratio_constant(&space, &profile, &mesh.points, &grid).unwrap();
    assert!(sup.polygon_inflation.is_some());
}
