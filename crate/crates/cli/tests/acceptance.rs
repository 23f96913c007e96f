//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the
//! lines are visible under `cargo test`; exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use locdisc::bounds::{
    chsh_bound_overlap, chsh_from_ps, energy_alpha, fidelity_bound_delta, fidelity_bound_ps, helstrom, pe_reduced,
    ps_from_energy, ps_n,
};
use locdisc::discrimination::{solve_global_bound, solve_local_bound};
use locdisc::ensembles::{axisymmetric_family, axisymmetric_qubit_family, ensemble_density, reduced_state, two_state_family};
use locdisc::linalg::{HermitianMatrix, Matrix};
use locdisc::quantum::{pauli, Party};
use locdisc::scalar::C;
use locdisc::sdp::{solve, Direction, SdpProblem, SparseHermitian, Status};
use locdisc::seesaw::{
    chsh_value, random_measurement, restart_rng, seesaw_run, ChshTarget, HalfStep, MeasurementAssignment, SeesawConfig,
};
use rand::Rng;

const IDENTITY_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-10;
const EIGENVECTOR_TOL: f64 = 1e-8;
const SEESAW_MATCH_TOL: f64 = 1e-4;
const NEVER_EXCEED_TOL: f64 = 1e-8;
const ATTAIN_TOL: f64 = 1e-3;
const HELSTROM_TOL: f64 = 1e-6;
const UNAMBIGUOUS_TOL: f64 = 1e-4;
const EQUIVALENCE_TOL: f64 = 2e-4;
const SAMPLING_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-7;
const QUBIT_ORACLE_TOL: f64 = 1e-6;

type Outcome = Result<String, String>;

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn close(what: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: {got} vs {want} (|diff| {:e} > {tol:e})", (got - want).abs()))
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn criterion_1() -> Outcome {
    let mut worst = 0.0f64;
    let mut track = |what: &str, got: f64, want: f64| -> Result<(), String> {
        worst = worst.max((got - want).abs());
        close(what, got, want, IDENTITY_TOL)
    };
    for d in grid(101) {
        let h = helstrom(d).map_err(e)?;
        track("helstrom = ps_n(2)", ps_n(2, d).map_err(e)?, h)?;
        let chsh = chsh_bound_overlap(2, d).map_err(e)?;
        track("chsh bound = chsh_from_ps(helstrom)", chsh.p_win_max, chsh_from_ps(h).map_err(e)?)?;
        track("chsh bound = (2 + sqrt(1+d^2))/4", chsh.p_win_max, (2.0 + (1.0 + d * d).sqrt()) / 4.0)?;
        for n in 2..=4 {
            let ps = ps_n(n, d).map_err(e)?;
            track("fidelity composition", fidelity_bound_ps(n, ps).map_err(e)?, fidelity_bound_delta(n, d).map_err(e)?)?;
            track("energy composition", ps_from_energy(n, energy_alpha(n, d).map_err(e)?).map_err(e)?, ps)?;
        }
    }
    let top = chsh_bound_overlap(2, 1.0).map_err(e)?.p_win_max;
    close("delta=1 anchor", top, (2.0 + 2f64.sqrt()) / 4.0, IDENTITY_TOL)?;
    close("delta=0 anchor", chsh_bound_overlap(2, 0.0).map_err(e)?.p_win_max, 0.75, IDENTITY_TOL)?;
    Ok(format!("101-point grid, worst residual {worst:.1e}"))
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    for n in 2..=4usize {
        for d in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let ens = axisymmetric_family(n, d).map_err(e)?;
            let rho = ensemble_density(&ens);
            let got = rho.eig().map_err(e)?.values;
            let nf = n as f64;
            // nonzero spectrum: eigenvalues of the Gram matrix divided by N
            let mut want = vec![(1.0 + (nf - 1.0) * d) / nf];
            want.extend(std::iter::repeat((1.0 - d) / nf).take(n - 1));
            want.resize(got.len(), 0.0);
            let want = sorted_desc(want);
            for (g, w) in got.iter().zip(&want) {
                close(&format!("spectrum N={n} d={d}"), *g, *w, SPECTRUM_TOL)?;
            }
            let ps = ps_n(n, d).map_err(e)?;
            let pe = pe_reduced(n, d).map_err(e)?;
            let mut local = vec![ps];
            local.extend(std::iter::repeat(pe).take(n - 1));
            let local = sorted_desc(local);
            for z in 0..n {
                let r = reduced_state(&ens, z, Party::A).map_err(e)?;
                let got = r.eig().map_err(e)?.values;
                for (g, w) in got.iter().zip(&local) {
                    close(&format!("reduced spectrum N={n} d={d} z={z}"), *g, *w, SPECTRUM_TOL)?;
                }
            }
            if d > 0.0 {
                let dim = rho.dim();
                let mut s = vec![C::new(0.0, 0.0); dim];
                for st in ens.states() {
                    for (a, b) in s.iter_mut().zip(st.amplitudes()) {
                        *a += *b;
                    }
                }
                let norm = s.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let v = rho.eig().map_err(e)?.vector(0);
                let ov: C<f64> = v.iter().zip(&s).map(|(a, b)| a.conj() * b / norm).sum();
                let phase = ov / ov.norm();
                let dist = v
                    .iter()
                    .zip(&s)
                    .map(|(a, b)| (a * phase - b / norm).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                if dist > EIGENVECTOR_TOL {
                    return Err(format!("top eigenvector N={n} d={d}: distance {dist:e}"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} ensembles, spectra to {SPECTRUM_TOL:e}"))
}

fn criterion_3() -> Outcome {
    let cfg = SeesawConfig { restarts: 20, ..Default::default() };
    let mut worst = 0.0f64;
    for d in grid(11) {
        let t = ChshTarget::from(&two_state_family(d).map_err(e)?);
        let r = seesaw_run(&t, &cfg).map_err(e)?;
        let bound = chsh_bound_overlap(2, d).map_err(e)?.p_win_max;
        close(&format!("seesaw d={d}"), r.best_value, bound, SEESAW_MATCH_TOL)?;
        if r.best_value > bound + NEVER_EXCEED_TOL {
            return Err(format!("seesaw d={d} exceeds the bound: {} > {bound}", r.best_value));
        }
        worst = worst.max((r.best_value - bound).abs());
    }
    Ok(format!("11 overlaps x 20 restarts, worst |diff| {worst:.1e}"))
}

fn criterion_4() -> Outcome {
    let cfg = SeesawConfig {
        restarts: 20,
        half_step: HalfStep::Balanced,
        ..Default::default()
    };
    let mut summary = Vec::new();
    for n in [3usize, 4] {
        let mut attained = 0;
        let mut max_excess = f64::NEG_INFINITY;
        for d in grid(11) {
            let t = ChshTarget::from(&axisymmetric_qubit_family(n, d).map_err(e)?);
            let r = seesaw_run(&t, &cfg).map_err(e)?;
            let bound = chsh_bound_overlap(n, d).map_err(e)?.p_win_max;
            let excess = r.best_value - bound;
            if excess > NEVER_EXCEED_TOL {
                return Err(format!("N={n} d={d}: {} exceeds {bound}", r.best_value));
            }
            max_excess = max_excess.max(excess);
            if excess.abs() <= ATTAIN_TOL {
                attained += 1;
            }
        }
        if attained < 5 {
            return Err(format!("N={n}: bound approached at only {attained} points"));
        }
        summary.push(format!("N={n}: max excess {max_excess:.1e}, attained at {attained}/11"));
    }
    Ok(summary.join("; "))
}

/// Best success rate for two real states at overlap `delta` with inconclusive
/// rate at least `q`, over mirror-symmetric POVMs `{a|u⟩⟨u|, a|u'⟩⟨u'|, rest}`.
fn two_state_povm_search(delta: f64, q: f64) -> f64 {
    let phi = 0.5 * delta.acos();
    let value = |t: f64| {
        let hit = (t + phi).sin().powi(2);
        let miss = (t - phi).sin().powi(2);
        let a_max = 1.0 / (2.0 * t.sin().powi(2).max(t.cos().powi(2)));
        let a = if hit + miss > 0.0 { a_max.min((1.0 - q) / (hit + miss)) } else { a_max };
        a * hit
    };
    let n = 200_000;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..=n {
        let t = 0.5 * PI * k as f64 / n as f64;
        let v = value(t);
        if v > best.0 {
            best = (v, t);
        }
    }
    let step = 0.5 * PI / n as f64;
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if value(m1) < value(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    value(0.5 * (lo + hi)).max(best.0)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let v0 = solve_global_bound(2, 0.8, 0.0, 1e-8).map_err(e)?;
    close("helstrom point", v0, 0.8, HELSTROM_TOL)?;
    close("helstrom point vs search", v0, two_state_povm_search(0.8, 0.0), HELSTROM_TOL)?;
    let v1 = solve_global_bound(2, 0.8, 0.8, 1e-8).map_err(e)?;
    let oracle = two_state_povm_search(0.8, 0.8);
    close("unambiguous point vs search", v1, oracle, UNAMBIGUOUS_TOL)?;
    close("unambiguous point", v1, 0.2, UNAMBIGUOUS_TOL)?;
    let secs = start.elapsed().as_secs_f64();
    if secs > 5.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("0.8 -> {v0:.9}, 0.2 -> {v1:.9} (search {oracle:.9}), {secs:.2}s"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in [2usize, 3] {
        for d in [0.5, 0.8] {
            for k in 0..10 {
                let q = d * k as f64 / 9.0;
                let l = solve_local_bound(n, d, q, 1e-8).map_err(e)?;
                let g = solve_global_bound(n, d, q, 1e-8).map_err(e)?;
                close(&format!("N={n} d={d} p={q:.4}"), l, g, EQUIVALENCE_TOL)?;
                worst = worst.max((l - g).abs());
                if n == 2 && k == 0 {
                    close("frontier start", l, helstrom(d).map_err(e)?, EQUIVALENCE_TOL)?;
                }
                if n == 2 && k == 9 {
                    close("frontier end", l, 1.0 - d, EQUIVALENCE_TOL)?;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 120.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("40 points, worst |local - global| {worst:.1e}, {secs:.1}s"))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut best = Vec::new();
    for (i, d) in [0.3, 0.7].into_iter().enumerate() {
        let t = ChshTarget::from(&two_state_family(d).map_err(e)?);
        let bound = chsh_bound_overlap(2, d).map_err(e)?.p_win_max;
        let mut rng = restart_rng(0x5eed, i);
        let mut top = 0.0f64;
        for _ in 0..100_000 {
            let alice = [random_measurement(2, 2, &mut rng).map_err(e)?, random_measurement(2, 2, &mut rng).map_err(e)?];
            let bob = [random_measurement(2, 2, &mut rng).map_err(e)?, random_measurement(2, 2, &mut rng).map_err(e)?];
            let v = chsh_value(&t, &MeasurementAssignment::new(alice, bob).map_err(e)?).map_err(e)?;
            if v > bound + SAMPLING_TOL {
                return Err(format!("d={d}: sampled {v} above {bound}"));
            }
            top = top.max(v);
        }
        best.push(format!("d={d}: max {top:.6} <= {bound:.6}"));
    }
    let secs = start.elapsed().as_secs_f64();
    if secs > 30.0 {
        return Err(format!("took {secs:.1}s"));
    }
    Ok(format!("{} ({secs:.1}s)", best.join(", ")))
}

fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix<f64> {
    let raw: Vec<C<f64>> = (0..n * n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let m = Matrix::from_fn(n, n, |i, j| (raw[i * n + j] + raw[j * n + i].conj()) * 0.5);
    HermitianMatrix::from_matrix(m).expect("hermitian by construction")
}

/// Maximizes `Tr[c X]` over qubit states, optionally with `Tr[b X] ≤ h`, on the
/// Bloch sphere: the free maximizer, else a search along the cut circle.
fn qubit_oracle(c: &HermitianMatrix<f64>, cut: Option<(&HermitianMatrix<f64>, f64)>) -> f64 {
    let bloch = |m: &HermitianMatrix<f64>| -> [f64; 3] { ['x', 'y', 'z'].map(|k| m.dot(&pauli(k)).unwrap() / 2.0) };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cv = bloch(c);
    let objective = |r: [f64; 3]| c.trace() / 2.0 + dot(cv, r);
    let cn = dot(cv, cv).sqrt();
    let free = cv.map(|x| x / cn);
    let Some((bm, h)) = cut else { return objective(free) };
    let bv = bloch(bm);
    let g = h - bm.trace() / 2.0;
    let bn = dot(bv, bv).sqrt();
    if dot(bv, free) <= g || g >= bn {
        return objective(free);
    }
    let bh = bv.map(|x| x / bn);
    let seed = if bh[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let s = dot(seed, bh);
    let mut u = [seed[0] - s * bh[0], seed[1] - s * bh[1], seed[2] - s * bh[2]];
    let un = dot(u, u).sqrt();
    u = u.map(|x| x / un);
    let v = [bh[1] * u[2] - bh[2] * u[1], bh[2] * u[0] - bh[0] * u[2], bh[0] * u[1] - bh[1] * u[0]];
    let (off, rad) = (g / bn, (1.0 - (g / bn).powi(2)).sqrt());
    let at = |t: f64| objective(std::array::from_fn(|k| off * bh[k] + rad * (t.cos() * u[k] + t.sin() * v[k])));
    let n = 20_000;
    let step = 2.0 * PI / n as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for k in 0..n {
        let t = step * k as f64;
        if at(t) > best.0 {
            best = (at(t), t);
        }
    }
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if at(m1) < at(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    at(0.5 * (lo + hi)).max(best.0)
}

fn criterion_8() -> Outcome {
    let mut rng = restart_rng(8, 0);
    let mut worst_gap = 0.0f64;
    let mut oracle_checks = 0;
    let mut worst_oracle = 0.0f64;
    for k in 0..100 {
        let d = 1 + k % 8;
        let c = random_hermitian(d, &mut rng);
        let mut p = SdpProblem::single(&c);
        p.add_equality(SparseHermitian::from_dense(0, &HermitianMatrix::identity(d)), 1.0);
        let mut cut = None;
        for _ in 0..rng.gen_range(0..3) {
            let b = random_hermitian(d, &mut rng);
            let h = b.trace() / d as f64 + rng.gen_range(0.05..0.5);
            p.add_inequality(SparseHermitian::from_dense(0, &b), Direction::Le, h);
            cut = if cut.is_none() { Some((b, h)) } else { Some((HermitianMatrix::zeros(0), f64::NAN)) };
        }
        let with_equality = d > 2 && rng.gen_bool(0.5);
        if with_equality {
            let a = random_hermitian(d, &mut rng);
            p.add_equality(SparseHermitian::from_dense(0, &a), a.trace() / d as f64);
        }
        let s = solve(&p, 1e-8).map_err(e)?;
        if s.status != Status::Optimal {
            return Err(format!("program {k}: status {}", s.status));
        }
        if !(s.dual_gap.abs() <= GAP_TOL) || s.primal_residual > 1e-8 {
            return Err(format!("program {k}: gap {:e}, residual {:e}", s.dual_gap, s.primal_residual));
        }
        worst_gap = worst_gap.max(s.dual_gap.abs());
        let single_cut = match &cut {
            None => Some(None),
            Some((b, h)) if b.dim() == d => Some(Some((b, *h))),
            _ => None,
        };
        if d == 2 {
            if let Some(cut) = single_cut {
                let oracle = qubit_oracle(&c, cut);
                close(&format!("program {k} vs oracle"), s.value, oracle, QUBIT_ORACLE_TOL)?;
                worst_oracle = worst_oracle.max((s.value - oracle).abs());
                oracle_checks += 1;
            }
        }
    }
    if oracle_checks == 0 {
        return Err("no qubit program was cross-checked".into());
    }
    Ok(format!(
        "100 programs, worst gap {worst_gap:.1e}; {oracle_checks} qubit programs within {worst_oracle:.1e} of the search oracle"
    ))
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let exe = env!("CARGO_BIN_EXE_locdisc");
    let runs: [&[&str]; 2] = [
        &["seesaw", "--delta", "0.7", "--restarts", "6", "--seed", "17"],
        &["tradeoff", "--n", "3", "--delta-grid", "0:0.25:1", "--seesaw", "--restarts", "4", "--seed", "5"],
    ];
    let mut sizes = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let path = dir.path().join(format!("run{i}_{rep}.csv"));
            let status = Command::new(exe)
                .args(*args)
                .arg("--out")
                .arg(&path)
                .env_remove("LOCDISC_OUT_DIR")
                .status()
                .map_err(e)?;
            if !status.success() {
                return Err(format!("{args:?} exited with {status}"));
            }
            outputs.push(std::fs::read(&path).map_err(e)?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{args:?}: outputs differ"));
        }
        sizes.push(outputs[0].len());
    }
    Ok(format!("two commands, byte-identical reruns ({sizes:?} bytes)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("closed-form composition identities", criterion_1),
        ("ensemble and reduced spectra", criterion_2),
        ("see-saw reproduces the two-state bound", criterion_3),
        ("see-saw respects the N=3,4 bounds", criterion_4),
        ("global discrimination SDP", criterion_5),
        ("local and global bounds coincide", criterion_6),
        ("random strategies never exceed the bound", criterion_7),
        ("SDP solver certification", criterion_8),
        ("deterministic CLI output", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} - {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} - {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
