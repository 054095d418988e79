//! Shared oracle constructions for integration tests, independent of the
//! production code paths they check.
#![allow(dead_code)] // each test target uses its own subset
//!
//! The many-particle oracle works on the full distinguishable-particle space
//! (dimension K^N): the Hamiltonian is assembled register by register from
//! the adjacency matrix plus the on-site interaction counted from register
//! coincidences, then projected onto normalized symmetrized vectors. The XY
//! oracle builds the full 2^K operator and slices out a Hamming block.

use gategraph::graph::Graph;
use gategraph::sector::{BosonBasis, HammingBasis};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Row-major index of the register configuration `regs` (first register most
/// significant), each register in `0..k`.
pub fn dist_index(regs: &[usize], k: usize) -> usize {
    regs.iter().fold(0, |acc, &r| acc * k + r)
}

pub fn dist_decompose(mut idx: usize, k: usize, n: usize) -> Vec<usize> {
    let mut regs = vec![0usize; n];
    for slot in (0..n).rev() {
        regs[slot] = idx % k;
        idx /= k;
    }
    regs
}

/// `sum_i A^(i) + sum_v n_v (n_v - 1)` on the distinguishable N-particle space.
pub fn distinguishable_hamiltonian(g: &Graph, n: usize) -> DMatrix<f64> {
    let k = g.num_vertices();
    let dim = k.pow(n as u32);
    let mut h = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        let regs = dist_decompose(idx, k, n);
        // hopping: replace one register along an adjacency entry
        for (slot, &at) in regs.iter().enumerate() {
            for &to in g.neighbors(at) {
                let mut target = regs.clone();
                target[slot] = to;
                h[(dist_index(&target, k), idx)] += 1.0;
            }
        }
        // interaction from register coincidences
        let mut counts = vec![0usize; k];
        for &r in &regs {
            counts[r] += 1;
        }
        let interaction: f64 = counts.iter().map(|&c| (c as f64) * (c as f64 - 1.0)).sum();
        h[(idx, idx)] += interaction;
    }
    h
}

/// Rows are the normalized symmetrized basis vectors ordered like `basis`,
/// expressed in distinguishable coordinates: a `dim_sym x K^N` isometry.
pub fn symmetrizer(basis: &BosonBasis) -> DMatrix<f64> {
    let k = basis.k();
    let n = basis.n();
    let dim = k.pow(n as u32);
    let mut s = DMatrix::zeros(basis.dim(), dim);
    let factorial = |m: usize| -> f64 { (1..=m).map(|x| x as f64).product::<f64>().max(1.0) };
    for idx in 0..dim {
        let regs = dist_decompose(idx, k, n);
        let mut occ = vec![0u8; k];
        for &r in &regs {
            occ[r] += 1;
        }
        let row = basis.rank(&occ);
        let weight: f64 = occ.iter().map(|&c| factorial(c as usize)).product();
        s[(row, idx)] = (weight / factorial(n)).sqrt();
    }
    s
}

/// The Bose-Hubbard matrix obtained by projecting the distinguishable-space
/// Hamiltonian onto the symmetrized vectors.
pub fn bose_hubbard_oracle(g: &Graph, n: usize) -> DMatrix<f64> {
    let basis = BosonBasis::new(g.num_vertices(), n).unwrap();
    let s = symmetrizer(&basis);
    let h = distinguishable_hamiltonian(g, n);
    &s * h * s.transpose()
}

/// The full XY operator on all 2^K spin configurations: swap terms across
/// edges plus occupied-self-loop counting on the diagonal.
pub fn xy_full_operator(g: &Graph) -> DMatrix<f64> {
    let k = g.num_vertices();
    let dim = 1usize << k;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim as u64 {
        let mut diag = 0.0;
        for v in 0..k {
            if g.has_self_loop(v) && s >> v & 1 == 1 {
                diag += 1.0;
            }
        }
        h[(s as usize, s as usize)] = diag;
        for (u, v) in g.upper_entries() {
            if u == v {
                continue;
            }
            if (s >> u & 1) != (s >> v & 1) {
                let t = s ^ (1 << u) ^ (1 << v);
                h[(t as usize, s as usize)] += 1.0;
            }
        }
    }
    h
}

/// Slice the Hamming-weight block out of the full XY operator, ordered like
/// `basis`.
pub fn hamming_block(full: &DMatrix<f64>, basis: &HammingBasis) -> DMatrix<f64> {
    let dim = basis.dim();
    let mut block = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            block[(i, j)] = full[(basis.state(i) as usize, basis.state(j) as usize)];
        }
    }
    block
}

/// Embed an occupation-basis state into distinguishable coordinates.
pub fn embed_occupation(phi: &[f64], basis: &BosonBasis) -> Vec<f64> {
    let s = symmetrizer(basis);
    let v = nalgebra::DVector::from_row_slice(phi);
    (s.transpose() * v).iter().copied().collect()
}

/// The per-register copy-pair map `|v> -> (|v,0> - |v,1>)/sqrt 2` applied to
/// every register of a distinguishable-space state on K vertices.
pub fn lift_oracle_distinguishable(state: &[f64], k: usize, n: usize) -> Vec<f64> {
    let out_dim = (2 * k).pow(n as u32);
    let mut out = vec![0.0; out_dim];
    let inv = 1.0 / 2.0f64.sqrt();
    for (idx, &amp) in state.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let regs = dist_decompose(idx, k, n);
        // expand every register into its two copies with signs
        let mut stack = vec![(0usize, 0usize, amp)]; // (slot, partial index, coeff)
        while let Some((slot, partial, coeff)) = stack.pop() {
            if slot == n {
                out[partial] += coeff;
                continue;
            }
            for d in 0..2usize {
                let sign = if d == 1 { -1.0 } else { 1.0 };
                stack.push((
                    slot + 1,
                    partial * (2 * k) + (2 * regs[slot] + d),
                    coeff * inv * sign,
                ));
            }
        }
    }
    out
}

pub fn random_graph(rng: &mut ChaCha20Rng, k: usize, edge_p: f64, loop_p: f64) -> Graph {
    let mut entries = Vec::new();
    for i in 0..k {
        for j in i..k {
            let p = if i == j { loop_p } else { edge_p };
            if rng.random::<f64>() < p {
                entries.push((i, j));
            }
        }
    }
    Graph::from_entries(k, &entries).unwrap()
}

/// Every graph on `k` vertices, self-loops included, enumerated by the bits
/// of `code` over the upper triangle.
pub fn graph_from_code(k: usize, code: u64) -> Graph {
    let mut entries = Vec::new();
    let mut bit = 0;
    for i in 0..k {
        for j in i..k {
            if code >> bit & 1 == 1 {
                entries.push((i, j));
            }
            bit += 1;
        }
    }
    Graph::from_entries(k, &entries).unwrap()
}

pub fn upper_triangle_bits(k: usize) -> u32 {
    (k * (k + 1) / 2) as u32
}
