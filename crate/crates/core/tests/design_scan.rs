use photonpair::design::{self, agvm_quality, default_scan_base, find_agvm, find_sgvm, scan, AGVM_QUALITY_THRESHOLD};
use photonpair::gaussian::{self, GaussianReport};
use photonpair::pipeline::{run, PipelineOptions};
use photonpair::scenario::{Auto, ScenarioConfig};
use photonpair::schmidt::{schmidt_number, schmidt_spectrum};
use photonpair::state::{auto_grid, build_jsa, FilterSpec, Mismatch, PmfModel, PmfShape};
use photonpair::{Dispersion, Material, PmType};

#[test]
fn solutions_satisfy_phasematching_and_condition_together() {
    let d = Dispersion::default();
    for s in [
        find_sgvm(&d, Material::Bbo, 1300.0, 1700.0, 2.3).unwrap(),
        find_agvm(&d, Material::Kdp, 780.0, 880.0, 20.0).unwrap(),
    ] {
        let crystal = s.crystal().unwrap();
        let w = photonpair::units::omega_from_nm(s.lambda_c_nm);
        let dk = d.delta_k(&crystal, w, w).unwrap();
        assert!(dk.abs() * s.length_mm * 1e3 < 1e-6, "{dk}");
        let walk = d.walkoff_terms(&crystal, s.lambda_c_nm).unwrap();
        assert!((walk.tau_s - s.tau_s_fs).abs() < 1e-9);
        assert!(s.residual_fs.abs() < design::RESIDUAL_LIMIT_FS);
    }
}

#[test]
fn sgvm_pump_width_zeroes_the_cross_moment() {
    let d = Dispersion::default();
    let s = find_sgvm(&d, Material::Bbo, 1300.0, 1700.0, 2.3).unwrap();
    let sigma = s.sigma_star_rad_per_fs.unwrap();
    let f = FilterSpec::unfiltered(1.0);
    let m = gaussian::second_moments(sigma, &f, s.tau_s_fs, s.tau_i_fs);
    assert!(m.tsi2.abs() < 1e-9 * m.tss2);
    assert!((gaussian::time_bandwidth(&m).unwrap() - 1.0).abs() < 1e-9);
    let m = gaussian::second_moments(2.0 * sigma, &f, s.tau_s_fs, s.tau_i_fs);
    assert!(gaussian::time_bandwidth(&m).unwrap() > 1.0);
}

#[test]
fn sgvm_jsa_is_exchange_symmetric() {
    let d = Dispersion::default();
    let s = find_sgvm(&d, Material::Bbo, 1300.0, 1700.0, 2.3).unwrap();
    let mut cfg = ScenarioConfig::new(Material::Bbo, PmType::TypeII, 2.3, s.lambda_c_nm, 15.0);
    cfg.mismatch = Mismatch::FirstOrder;
    cfg.grid_n = Auto::Value(256);
    let res = cfg.resolve(&d).unwrap();
    let jsa = build_jsa(&d, &res.source, &res.grid).unwrap();
    let n = res.grid.size;
    let peak = jsa.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max((jsa.values[[j, k]].norm() - jsa.values[[k, j]].norm()).abs());
        }
    }
    assert!(worst < 1e-9 * peak, "{worst}");
}

#[test]
fn agvm_transform_limit_with_length() {
    let d = Dispersion::default();
    let s = find_agvm(&d, Material::Kdp, 780.0, 880.0, 20.0).unwrap();
    let sigma = photonpair::state::sigma_from_fwhm(s.lambda_c_nm / 2.0, 5.0).unwrap();
    let tb: Vec<f64> = [5.0, 10.0, 20.0, 40.0, 80.0]
        .iter()
        .map(|&l| {
            let k = l / s.length_mm;
            let w = photonpair::Walkoff { tau_s: s.tau_s_fs * k, tau_i: s.tau_i_fs * k };
            GaussianReport::new(sigma, &FilterSpec::unfiltered(2.0), w, 2.0).unwrap().tb
        })
        .collect();
    assert!(tb.windows(2).all(|p| p[1] < p[0]), "{tb:?}");
    assert!(tb[4] - 1.0 < 1e-3, "{tb:?}");

    let q = agvm_quality(&s, 20.0, sigma);
    assert!(q > AGVM_QUALITY_THRESHOLD, "{q}");
    assert!(tb[2] < 1.01);
    assert!((agvm_quality(&s, 10.0, sigma) / q - 0.5).abs() < 1e-12);
    assert!(agvm_quality(&s, 20.0, 1e-9) < 1e-4);
    assert!(gaussian::cw_limit_time_bandwidth(1e-6, s.tau_minus_fs) > 1e3);
}

#[test]
fn kdp_schmidt_number_barely_depends_on_pmf_shape() {
    let d = Dispersion::default();
    let base = ScenarioConfig::new(Material::Kdp, PmType::TypeII, 20.0, 830.0, 5.0);
    let source = base.resolve(&d).unwrap().source;
    let k = |pmf: PmfModel| {
        let mut s = source.clone();
        s.pmf = pmf;
        let g = auto_grid(&d, &s).unwrap();
        schmidt_number(&schmidt_spectrum(&build_jsa(&d, &s, &g).unwrap()).unwrap())
    };
    let sinc = k(PmfModel { shape: PmfShape::Sinc, mismatch: Mismatch::Full });
    let gauss = k(PmfModel::GAUSSIAN_FIRST_ORDER);
    assert!((sinc / gauss - 1.0).abs() < 0.15, "{sinc} {gauss}");
}

fn small_base() -> ScenarioConfig {
    let mut b = default_scan_base();
    b.grid_n = Auto::Value(256);
    b.joint_temporal = false;
    b
}

#[test]
fn scan_cell_matches_direct_run_and_repeats() {
    let d = Dispersion::default();
    let base = small_base();
    let a = scan(&d, &base, &[2.0], &[5.0], PipelineOptions::default()).unwrap();
    let b = scan(&d, &base, &[2.0], &[5.0], PipelineOptions::default()).unwrap();
    assert_eq!(a, b);
    let mut cfg = base.clone();
    cfg.length_mm = 2.0;
    cfg.pump_fwhm_nm = 5.0;
    let direct = run(&d, &cfg, PipelineOptions::default()).unwrap().report;
    let rec = &a.records[0];
    assert_eq!(rec.tb_numeric, direct.numerical.as_ref().map(|n| n.tb));
    assert_eq!(rec.schmidt_number, direct.schmidt.as_ref().map(|s| s.schmidt_number));
    assert_eq!(rec.delta_t_analytic_fs, direct.gaussian.as_ref().map(|g| g.delta_t));
}

#[test]
fn scan_records_failures_per_cell() {
    let d = Dispersion::default();
    let t = scan(&d, &small_base(), &[1.0, 3000.0], &[5.0], PipelineOptions::default()).unwrap();
    assert_eq!(t.records.len(), 2);
    assert!(t.records[0].error.is_none());
    assert!(t.records[1].error.is_some());
    assert_eq!(t.failures(), 1);
    assert!(scan(&d, &small_base(), &[], &[5.0], PipelineOptions::default()).is_err());
}

#[test]
fn numerical_tb_grows_with_length() {
    let d = Dispersion::default();
    let mut base = default_scan_base();
    base.joint_temporal = false;
    base.schmidt = false;
    let t = scan(&d, &base, &[1.0, 2.0, 5.0, 10.0], &[5.0], PipelineOptions::default()).unwrap();
    let tb: Vec<f64> = t.records.iter().map(|r| r.tb_numeric.unwrap()).collect();
    assert!(tb.windows(2).all(|p| p[1] > p[0]), "{tb:?}");
    let an: Vec<f64> = t.records.iter().map(|r| r.tb_analytic.unwrap()).collect();
    assert!(an.windows(2).all(|p| p[1] > p[0]), "{an:?}");
}
