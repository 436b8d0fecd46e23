use std::collections::BTreeMap;
use std::time::Instant;

use atomci::model::{ModelSpec, SymmetryChoice};
use atomci::solver::{optimize_exponents, EnergyModel, OptimizeOptions};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let z: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(19.0);
    let n: u32 = z as u32;
    let mut constraints = BTreeMap::new();
    if let Some(k) = args.get(2) {
        constraints.insert("4s".parse().unwrap(), k.parse().unwrap());
    }
    let spec = ModelSpec {
        n_electrons: n,
        nuclear_charge: z,
        min_shell: "3p".parse().unwrap(),
        max_shell: std::env::var("MAX_SHELL").unwrap_or_else(|_| "4s".into()).parse().unwrap(),
        occupation_constraints: constraints,
        symmetry: SymmetryChoice::Hund,
    };
    let t0 = Instant::now();
    let model = EnergyModel::new(&spec).unwrap();
    println!(
        "term = {}, dim = {}, support = {} (build {:?})",
        model.subspace.term,
        model.dimension(),
        model.support.len(),
        t0.elapsed()
    );
    let screen = spec.screening_exponents();
    let init: Vec<f64> = model.subspace.shells.iter().map(|s| screen[s]).collect();
    println!("shells = {:?}", model.subspace.shells);
    println!("init   = {init:?}");
    let t0 = Instant::now();
    let e0 = model.energy(&init).unwrap();
    println!("E(init) = {e0:.6}  ({:?}/eval)", t0.elapsed());
    let t0 = Instant::now();
    let r = optimize_exponents(&model, &init, &OptimizeOptions::default()).unwrap();
    println!(
        "E* = {:.6} after {} evals ({:?}, converged = {})",
        r.energy,
        r.evaluations,
        t0.elapsed(),
        r.converged
    );
    println!("exponents: {:?}", r.exponents);
    println!("virial ratio: {:.8}", r.virial_ratio);
    for w in &r.weights {
        println!("  {}  weight {:.4}", w.configuration, w.weight);
    }

    if std::env::var("SCAN_3D").is_ok() {
        let d_idx = model
            .subspace
            .shells
            .iter()
            .position(|s| format!("{s}") == "3d")
            .unwrap();
        let mut exps: Vec<f64> = r
            .exponents
            .iter()
            .zip(&init)
            .map(|((_, o), &i)| o.unwrap_or(i))
            .collect();
        println!("scan of E(Z_3d), other exponents at optimum:");
        let mut zd = 0.8;
        while zd < 4.05 {
            exps[d_idx] = zd;
            let e = model.energy(&exps).unwrap();
            println!("  Z_3d = {zd:.2}  E = {e:.6}");
            zd += 0.1;
        }
    }
}
