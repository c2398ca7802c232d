use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stredalab::markers::{compute_markers, MARKER_IMAG_TOL};
use stredalab::model::{build_hamiltonian, spec::TB_DEMO_FERMI};
use stredalab::oracle::brute_force_identities;
use stredalab::par::{set_execution, Execution};
use stredalab::spectral::{build_contour, detect_gap, eigensolve, RieszProjector};
use stredalab::{BulkWindow, EigenOptions, HamiltonianSpec};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn riesz_markers(c: &mut Criterion) {
    let spec = HamiltonianSpec { half_width_l: 8, ..HamiltonianSpec::tb_spin_flux_demo() };
    let h = build_hamiltonian(&spec).unwrap();
    let s = eigensolve(&h, &EigenOptions::default()).unwrap();
    let gap = detect_gap(&s, TB_DEMO_FERMI).unwrap();
    let contour = build_contour(&gap, &s, 64).unwrap();
    let window = BulkWindow::default_for(h.geometry()).unwrap();
    let p = RieszProjector { h: &h, contour: &contour };

    let mut group = c.benchmark_group("riesz_markers");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_execution(mode);
            b.iter(|| compute_markers(&p, &window, MARKER_IMAG_TOL).unwrap())
        });
    }
    group.finish();
}

fn brute_force(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force_dim_100");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            set_execution(mode);
            b.iter(|| brute_force_identities(100, 1).unwrap())
        });
    }
    group.finish();
    set_execution(Execution::Parallel);
}

criterion_group!(benches, riesz_markers, brute_force);
criterion_main!(benches);
