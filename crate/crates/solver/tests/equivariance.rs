//! Two-pipeline scaling checks: integrating at (eps, nu) and rescaling the
//! result must agree with rescaling the data first and integrating in the
//! reference regime with dt divided by eps^2*nu. The comparison is its own
//! oracle: both pipelines share no scaling code beyond the change of
//! variables under test.

use lowmach_core::bony::sample_pair;
use lowmach_core::field::{SpectralField, VectorField};
use lowmach_core::grid::Grid;
use lowmach_solver::baro::{run_baro, BaroState};
use lowmach_solver::nsf::{run_nsf, NsfConfig, NsfState};
use lowmach_solver::params::{PhysicalParams, PressureLaw, StepperConfig};
use lowmach_solver::rescale::{rescale_baro_state, rescale_nsf_state, unscale_baro_state, unscale_nsf_state};

const PIPELINE_TOL: f64 = 1e-8;

fn random_field(grid: Grid, seed: u64, amp: f64) -> SpectralField {
    let (mut z, _) = sample_pair(&grid, seed);
    let norm = z.l2_norm();
    z.scale(amp / norm);
    z
}

fn random_vector(grid: Grid, seed: u64, amp: f64) -> VectorField {
    let comps: Vec<SpectralField> =
        (0..grid.d()).map(|i| random_field(grid, seed + i as u64, amp)).collect();
    VectorField::new(comps).unwrap()
}

fn field_gap(x: &SpectralField, y: &SpectralField) -> f64 {
    x.sub(y).unwrap().l2_norm()
}

fn vector_gap(x: &VectorField, y: &VectorField) -> f64 {
    x.sub(y).unwrap().l2_norm()
}

#[test]
fn barotropic_solve_then_rescale_matches_rescale_then_solve() {
    let grid = Grid::new(2, 32, 1.0).unwrap();
    let (eps, lambda, mu) = (0.5, -1.0, 1.0);
    let params = PhysicalParams::barotropic(eps, lambda, mu, PressureLaw::Isothermal).unwrap();
    let nu = params.nu();
    let initial = BaroState::new(
        0.0,
        random_field(grid, 10, 0.04),
        random_vector(grid, 20, 0.04),
        params,
    )
    .unwrap();

    let dt_ref = 0.02;
    let steps = 25;
    let cfg_eps = StepperConfig::new(eps * eps * nu * dt_ref).unwrap();
    let solved = run_baro(initial.clone(), &cfg_eps, steps).unwrap();
    let a_path = rescale_baro_state(solved.last()).unwrap();

    let cfg_ref = StepperConfig::new(dt_ref).unwrap();
    let reference_initial = rescale_baro_state(&initial).unwrap();
    let b_path = run_baro(reference_initial, &cfg_ref, steps).unwrap();
    let b_path = b_path.last();

    assert!((a_path.t - b_path.t).abs() < 1e-12, "{} vs {}", a_path.t, b_path.t);
    let da = field_gap(&a_path.a, &b_path.a);
    let du = vector_gap(&a_path.u, &b_path.u);
    assert!(da < PIPELINE_TOL, "density gap {da:.3e}");
    assert!(du < PIPELINE_TOL, "velocity gap {du:.3e}");
}

#[test]
fn conducting_solve_then_rescale_matches_rescale_then_solve() {
    let grid = Grid::new(2, 32, 1.0).unwrap();
    let (eps, lambda, mu, kappa) = (0.5, -0.5, 0.75, 0.6);
    let params = PhysicalParams::heat_conducting(eps, lambda, mu, kappa).unwrap();
    let nu = params.nu();
    let initial = NsfState::new(
        0.0,
        random_field(grid, 31, 0.03),
        random_vector(grid, 41, 0.03),
        random_field(grid, 51, 0.03),
        params,
    )
    .unwrap();

    let dt_ref = 0.02;
    let steps = 20;
    let cfg_eps = NsfConfig::new(eps * eps * nu * dt_ref).unwrap();
    let solved = run_nsf(initial.clone(), &cfg_eps, steps).unwrap();
    let a_path = rescale_nsf_state(solved.last()).unwrap();

    let cfg_ref = NsfConfig::new(dt_ref).unwrap();
    let reference_initial = rescale_nsf_state(&initial).unwrap();
    let b_path = run_nsf(reference_initial, &cfg_ref, steps).unwrap();
    let b_path = b_path.last();

    let da = field_gap(&a_path.a, &b_path.a);
    let du = vector_gap(&a_path.u, &b_path.u);
    let dth = field_gap(&a_path.theta, &b_path.theta);
    assert!(da < PIPELINE_TOL, "density gap {da:.3e}");
    assert!(du < PIPELINE_TOL, "velocity gap {du:.3e}");
    assert!(dth < PIPELINE_TOL, "temperature gap {dth:.3e}");
}

#[test]
fn unscaling_reference_data_then_solving_inverts_the_first_pipeline() {
    // Start from reference data, push it down to (eps, nu), integrate there,
    // and come back: the result must match the reference integration.
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let reference =
        PhysicalParams::barotropic(1.0, -1.0, 1.0, PressureLaw::Isothermal).unwrap();
    let initial = BaroState::new(
        0.0,
        random_field(grid, 61, 0.05),
        random_vector(grid, 71, 0.05),
        reference,
    )
    .unwrap();
    let (eps, nu) = (0.25, 1.0);
    let dt_ref = 0.05;
    let steps = 8;

    let ref_run = run_baro(initial.clone(), &StepperConfig::new(dt_ref).unwrap(), steps).unwrap();

    let phys_initial = unscale_baro_state(&initial, eps, nu).unwrap();
    let cfg = StepperConfig::new(eps * eps * nu * dt_ref).unwrap();
    let phys_run = run_baro(phys_initial, &cfg, steps).unwrap();
    let back = rescale_baro_state(phys_run.last()).unwrap();

    let da = field_gap(&back.a, &ref_run.last().a);
    let du = vector_gap(&back.u, &ref_run.last().u);
    assert!(da < PIPELINE_TOL, "density gap {da:.3e}");
    assert!(du < PIPELINE_TOL, "velocity gap {du:.3e}");
}

#[test]
fn nsf_round_trip_through_the_physical_regime() {
    let grid = Grid::new(2, 16, 1.0).unwrap();
    let reference = PhysicalParams::heat_conducting(1.0, -0.5, 0.75, 0.8).unwrap();
    let initial = NsfState::new(
        0.0,
        random_field(grid, 81, 0.05),
        random_vector(grid, 91, 0.05),
        random_field(grid, 101, 0.05),
        reference,
    )
    .unwrap();
    let (eps, nu) = (0.125, 1.0);
    let down = unscale_nsf_state(&initial, eps, nu).unwrap();
    let back = rescale_nsf_state(&down).unwrap();
    let da = field_gap(&back.a, &initial.a);
    let dth = field_gap(&back.theta, &initial.theta);
    assert!(da < 1e-14, "density gap {da:.3e}");
    assert!(dth < 1e-14, "temperature gap {dth:.3e}");
    assert_eq!(back.params, initial.params);
}
