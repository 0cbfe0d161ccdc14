use std::sync::Arc;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pencil_core::dressing::{assemble_f, solve_marchenko, PotentialFamily, Potentials};
use pencil_core::lame::residual_suite;
use pencil_core::lax::{monodromy, Connection, LaxKind, Rectangle, Stepper};
use pencil_core::{re, Coordinates, DiscretizationSpec, FrameFamily, Grid, PencilSpec, SystemInstance, Univariate};

fn marchenko(c: &mut Criterion) {
    let pots = Arc::new(
        Potentials::pair(PotentialFamily::Exponential {
            amplitude: re(0.05),
            rate_x: 1.0,
            rate_y: 1.0,
        })
        .unwrap(),
    );
    let kernel = assemble_f(pots, &Coordinates::real(&[-1.5, -1.2])).unwrap();
    let mut group = c.benchmark_group("marchenko");
    for per_panel in [6, 12] {
        let disc = DiscretizationSpec::geometric(0.5, 40.0, 8, per_panel).build(0.0).unwrap();
        group.bench_function(format!("{} nodes", disc.len()), |b| {
            b.iter(|| solve_marchenko(black_box(&kernel), &disc).unwrap())
        });
    }
    group.finish();
}

fn sphere() -> SystemInstance {
    let frame = FrameFamily::Sphere { radius: 1.0 }.build().unwrap();
    let pencil = PencilSpec::new(vec![Univariate::affine(1.0, 5.0), Univariate::exp(1.0, 0.3)], re(0.0), re(0.0));
    SystemInstance::from_frame(frame, pencil).unwrap()
}

fn suite(c: &mut Criterion) {
    let data = sphere();
    let grid = Grid::tensor_box(&[0.5, -1.0], &[2.5, 1.0], 8).unwrap();
    c.bench_function("residual suite 8x8", |b| b.iter(|| residual_suite(black_box(&data), &grid, 1e-6).unwrap()));
}

fn lax(c: &mut Criterion) {
    let conn = Connection::new(LaxKind::FlatPencil, sphere(), re(0.7));
    let rect = Rectangle::new(Coordinates::real(&[1.0, 0.5]), 0, 1, 1e-2, 1e-2);
    c.bench_function("monodromy 64 steps", |b| {
        b.iter(|| monodromy(black_box(&conn), &rect, Stepper::default()).unwrap())
    });
}

criterion_group!(benches, marchenko, suite, lax);
criterion_main!(benches);
