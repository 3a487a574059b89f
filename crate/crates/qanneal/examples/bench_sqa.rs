use qanneal::sqa::{sqa_run, SqaSchedule};
use qanneal::topology::{chimera_graph, random_instance, ChimeraSpec};
use std::time::Instant;

fn main() {
    let g = chimera_graph(&ChimeraSpec::new(3, 3, 4)).unwrap();
    let inst = random_instance(g.b, &g.edges, 1).unwrap();
    println!("b = {}, edges = {}", g.b, g.edges.len());
    let sched = SqaSchedule::dw_default();
    for (tau, sweeps) in [(30usize, 10_000usize), (60, 10_000)] {
        let t0 = Instant::now();
        let r = sqa_run(&inst, &sched, tau, sweeps, 7).unwrap();
        let dt = t0.elapsed().as_secs_f64();
        let props = sweeps * (tau * g.b + g.b);
        println!(
            "tau={tau} sweeps={sweeps}: {dt:.3}s  ({:.1} ns/proposal)  final={} best={}",
            dt * 1e9 / props as f64,
            r.final_energy,
            r.best_energy
        );
    }
}
