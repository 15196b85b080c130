//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's simulator, Hamiltonian builder or eigensolver.

#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type Dense = Vec<Vec<C>>;

fn pauli(k: usize) -> [[C; 2]; 2] {
    let (o, z, i) = (C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 1.0));
    match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        _ => [[o, z], [z, -o]],
    }
}

/// Kronecker product of single-qubit Paulis, qubit 0 leftmost.
fn pauli_string(ops: &[usize]) -> Dense {
    let mut m: Dense = vec![vec![C::new(1.0, 0.0)]];
    for &k in ops {
        let p = pauli(k);
        let d = m.len();
        let mut out = vec![vec![C::new(0.0, 0.0); 2 * d]; 2 * d];
        for r in 0..d {
            for c in 0..d {
                for a in 0..2 {
                    for b in 0..2 {
                        out[2 * r + a][2 * c + b] = m[r][c] * p[a][b];
                    }
                }
            }
        }
        m = out;
    }
    m
}

/// Open Heisenberg chain in a uniform (1,1,1) field, built from Pauli strings.
pub fn heisenberg(n: usize, j: f64, h: f64) -> Dense {
    let d = 1 << n;
    let mut out = vec![vec![C::new(0.0, 0.0); d]; d];
    let mut add = |ops: Vec<usize>, w: f64| {
        let m = pauli_string(&ops);
        for r in 0..d {
            for c in 0..d {
                out[r][c] += m[r][c] * w;
            }
        }
    };
    for a in 1..=3 {
        for s in 0..n {
            let mut ops = vec![0; n];
            ops[s] = a;
            add(ops.clone(), h);
            if s + 1 < n {
                ops[s + 1] = a;
                add(ops, j);
            }
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi sweeps.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lowest eigenvalue of a Hermitian matrix through its real 2d×2d form
/// [[Re, −Im], [Im, Re]] (every eigenvalue appears twice).
pub fn hermitian_min_eigenvalue(h: &Dense) -> f64 {
    let d = h.len();
    let mut r = vec![vec![0.0; 2 * d]; 2 * d];
    for i in 0..d {
        for j in 0..d {
            r[i][j] = h[i][j].re;
            r[i + d][j + d] = h[i][j].re;
            r[i][j + d] = -h[i][j].im;
            r[i + d][j] = h[i][j].im;
        }
    }
    jacobi_eigenvalues(r)[0]
}

fn apply_1q(psi: &mut [C], n: usize, q: usize, g: [[C; 2]; 2]) {
    let m = 1 << (n - 1 - q);
    for i in 0..psi.len() {
        if i & m == 0 {
            let (a, b) = (psi[i], psi[i | m]);
            psi[i] = g[0][0] * a + g[0][1] * b;
            psi[i | m] = g[1][0] * a + g[1][1] * b;
        }
    }
}

fn rx(psi: &mut [C], n: usize, q: usize, t: f64) {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    let g = [[C::new(c, 0.0), C::new(0.0, -s)], [C::new(0.0, -s), C::new(c, 0.0)]];
    apply_1q(psi, n, q, g);
}

fn rz(psi: &mut [C], n: usize, q: usize, t: f64) {
    let g = [
        [C::from_polar(1.0, -t / 2.0), C::new(0.0, 0.0)],
        [C::new(0.0, 0.0), C::from_polar(1.0, t / 2.0)],
    ];
    apply_1q(psi, n, q, g);
}

fn cnot(psi: &mut [C], n: usize, c: usize, t: usize) {
    let (mc, mt) = (1 << (n - 1 - c), 1 << (n - 1 - t));
    for i in 0..psi.len() {
        if i & mc != 0 && i & mt == 0 {
            psi.swap(i, i | mt);
        }
    }
}

fn flip(psi: &mut [C], n: usize, q: usize) {
    let m = 1 << (n - 1 - q);
    for i in 0..psi.len() {
        if i & m == 0 {
            psi.swap(i, i | m);
        }
    }
}

/// Pure-state ansatz run; `flips[l]` optionally flips one qubit at the end
/// of layer l.
pub fn ansatz_state(n: usize, layers: usize, theta: &[f64], flips: &[Option<usize>]) -> Vec<C> {
    let mut psi = vec![C::new(0.0, 0.0); 1 << n];
    psi[0] = C::new(1.0, 0.0);
    let mut k = 0;
    for q in 0..n {
        rx(&mut psi, n, q, theta[k]);
        k += 1;
    }
    for q in 0..n {
        rz(&mut psi, n, q, theta[k]);
        k += 1;
    }
    let mut pairs: Vec<usize> = (0..n - 1).step_by(2).collect();
    pairs.extend((1..n - 1).step_by(2));
    for l in 0..layers {
        for &c in &pairs {
            cnot(&mut psi, n, c, c + 1);
            rx(&mut psi, n, c, theta[k]);
            rx(&mut psi, n, c + 1, theta[k + 1]);
            rz(&mut psi, n, c, theta[k + 2]);
            rz(&mut psi, n, c + 1, theta[k + 3]);
            k += 4;
        }
        if let Some(q) = flips[l] {
            flip(&mut psi, n, q);
        }
    }
    assert_eq!(k, theta.len());
    psi
}

pub fn expect(psi: &[C], h: &Dense) -> f64 {
    let mut e = C::new(0.0, 0.0);
    for r in 0..psi.len() {
        for c in 0..psi.len() {
            e += psi[r].conj() * h[r][c] * psi[c];
        }
    }
    e.re
}

/// Exact bit-flip noisy energy as a weighted sum over flip trajectories:
/// each layer either keeps the state (1 − N p) or flips one qubit (p).
pub fn noisy_energy(n: usize, layers: usize, theta: &[f64], p: f64, h: &Dense) -> f64 {
    let choices = n + 1;
    let mut total = 0.0;
    for code in 0..choices.pow(layers as u32) {
        let mut c = code;
        let mut weight = 1.0;
        let mut flips = Vec::with_capacity(layers);
        for _ in 0..layers {
            let pick = c % choices;
            c /= choices;
            if pick == 0 {
                weight *= 1.0 - n as f64 * p;
                flips.push(None);
            } else {
                weight *= p;
                flips.push(Some(pick - 1));
            }
        }
        if weight != 0.0 {
            total += weight * expect(&ansatz_state(n, layers, theta, &flips), h);
        }
    }
    total
}

pub fn dimer2_theta(t0: f64, t1: f64) -> [f64; 8] {
    [t0, t0, t1, t1, -t0, -t0, -t1, -t1]
}
