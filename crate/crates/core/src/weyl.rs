//! The pro-p extended Weyl group `W(1)` and its combinatorics.
//!
//! An element is stored in the canonical form `n_v · λ` with `v` in the
//! finite Weyl group and `λ ∈ Λ(1) = ℤ^r × Z_κ`.  The lifts `n_w` are fixed
//! by `n_{w₁w₂} = n_{w₁} n_{w₂}` whenever lengths add, so products of lifts
//! deviate from lifts of products by a `Z_κ`-valued cocycle which is
//! computed letter by letter from `n_s² = t_s`.
//!
//! Everything length- and order-theoretic is relative to a Levi subset
//! `Δ_M ⊆ Δ` through [`LeviCtx`], so the same code serves the full algebra
//! and every parabolic subalgebra.

use crate::roots::{bruhat_leq_w0, dot, RootIdx, RootSystem, W0Idx, W0Table};
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Subset of the simple roots, as a bitmask.
pub type DeltaSet = u32;

pub fn delta_full(n: usize) -> DeltaSet {
    ((1u64 << n) - 1) as DeltaSet
}
pub fn delta_contains(d: DeltaSet, i: usize) -> bool {
    d & (1 << i) != 0
}
pub fn delta_iter(d: DeltaSet, n: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&i| delta_contains(d, i))
}
pub fn delta_subset(a: DeltaSet, b: DeltaSet) -> bool {
    a & !b == 0
}
/// All subsets of `d`, ascending.
pub fn delta_subsets(d: DeltaSet) -> Vec<DeltaSet> {
    let mut out = vec![0];
    let mut s = d;
    let mut bits = vec![];
    while s != 0 {
        let b = s & s.wrapping_neg();
        bits.push(b);
        s ^= b;
    }
    for b in bits {
        let mut more: Vec<DeltaSet> = out.iter().map(|x| x | b).collect();
        out.append(&mut more);
    }
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

/// An element of `Λ(1) = ℤ^r × Z_κ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Lambda {
    pub free: Vec<i64>,
    pub tors: Vec<u32>,
}

/// An element of `W(1)` in the canonical form `n_v · λ`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct W1Elt {
    pub v: W0Idx,
    pub lam: Lambda,
}

impl W1Elt {
    pub fn is_lambda(&self) -> bool {
        self.v == 0
    }
    pub fn is_torsion(&self) -> bool {
        self.v == 0 && self.lam.free.iter().all(|&x| x == 0)
    }
}

/// Finitely supported integer function on `Z_κ` (the parameter `c_s`).
pub type CFunc = Vec<(Vec<u32>, i64)>;

/// An integer lattice presentation of a subgroup of `ℤ^r × Z_κ`, used for
/// membership tests (`Λ(1) ∩ W_aff(1)` and friends).
#[derive(Clone, Debug)]
pub struct SubLattice {
    dim: usize,
    /// Row-style Hermite normal form of the generator lattice.
    hnf: Vec<Vec<i64>>,
}

impl SubLattice {
    pub fn from_gens(dim: usize, gens: &[Vec<i64>]) -> SubLattice {
        let mut rows: Vec<Vec<i64>> = gens.iter().filter(|g| g.iter().any(|&x| x != 0)).cloned().collect();
        for r in &rows {
            assert_eq!(r.len(), dim);
        }
        // integer row echelon (non-reduced HNF is enough for membership)
        let mut mat: Vec<Vec<i64>> = Vec::new();
        for row in rows.drain(..) {
            mat.push(row);
        }
        hnf_rows(&mut mat);
        SubLattice { dim, hnf: mat }
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let mut v = v.to_vec();
        for row in &self.hnf {
            let p = row.iter().position(|&x| x != 0);
            let Some(p) = p else { continue };
            if v[p] % row[p] == 0 {
                let f = v[p] / row[p];
                for (x, &r) in v.iter_mut().zip(row) {
                    *x -= f * r;
                }
            }
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn eq_lattice(&self, other: &SubLattice) -> bool {
        self.hnf
            .iter()
            .all(|r| other.contains(r))
            && other.hnf.iter().all(|r| self.contains(r))
    }
}

/// In-place integer row echelon via the Euclidean algorithm.
fn hnf_rows(mat: &mut Vec<Vec<i64>>) {
    if mat.is_empty() {
        return;
    }
    let cols = mat[0].len();
    let mut r = 0;
    for c in 0..cols {
        loop {
            // find row >= r with nonzero in column c and minimal |value|
            let mut best: Option<usize> = None;
            for (i, row) in mat.iter().enumerate().skip(r) {
                if row[c] != 0 && best.map_or(true, |b| row[c].abs() < mat[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            mat.swap(r, b);
            let mut done = true;
            let pivot = mat[r][c];
            for i in r + 1..mat.len() {
                if mat[i][c] != 0 {
                    let f = mat[i][c] / pivot;
                    for j in 0..cols {
                        mat[i][j] -= f * mat[r][j];
                    }
                    if mat[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                if mat[r][c] < 0 {
                    for x in mat[r].iter_mut() {
                        *x = -*x;
                    }
                }
                r += 1;
                break;
            }
        }
        if r == mat.len() {
            break;
        }
    }
    mat.retain(|row| row.iter().any(|&x| x != 0));
}

// ---------------------------------------------------------------------------
// The datum

/// Validated group datum: root system, `W_0`, `Λ(1)`-structure, lifts and
/// parameters. Immutable after construction; shared behind `Arc`.
pub struct Datum {
    pub name: String,
    pub rs: RootSystem,
    pub w0: W0Table,
    pub zk_orders: Vec<u32>,
    /// Torsion action matrix per simple reflection.
    pub tors_gen_mats: Vec<Vec<Vec<i64>>>,
    /// Composed torsion action per `W_0` element.
    tors_mats: Vec<Vec<Vec<i64>>>,
    /// `t_s = n_s²` per simple reflection.
    pub ns_squares: Vec<Vec<u32>>,
    /// `λ_θ` per irreducible component of the full system.
    pub affine_lifts: Vec<Lambda>,
    /// Generators of `Λ(1) ∩ W_{aff,P_α}(1)` per simple root.
    pub lambda_aff_gens: Vec<Vec<Lambda>>,
    pub q: u64,
    pub prime: u64,
    /// `c` for the canonical lift of each finite simple reflection.
    pub c_fin: Vec<CFunc>,
    /// `c` for the canonical affine letter of each component.
    pub c_aff: Vec<CFunc>,
    /// Canonical digest of the originating config.
    pub digest: String,
    tau_memo: Mutex<HashMap<(W0Idx, W0Idx), Vec<u32>>>,
    levis: Mutex<HashMap<DeltaSet, Arc<LeviCtx>>>,
    self_ref: OnceLock<std::sync::Weak<Datum>>,
}

impl std::fmt::Debug for Datum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Datum({})", self.name)
    }
}

impl Datum {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: String,
        rs: RootSystem,
        zk_orders: Vec<u32>,
        tors_gen_mats: Vec<Vec<Vec<i64>>>,
        ns_squares: Vec<Vec<u32>>,
        affine_lifts: Vec<Lambda>,
        lambda_aff_gens: Vec<Vec<Lambda>>,
        q: u64,
        prime: u64,
        c_fin: Vec<CFunc>,
        c_aff: Vec<CFunc>,
        digest: String,
    ) -> Result<Arc<Datum>> {
        let w0 = W0Table::generate(&rs)?;
        let n = w0.order();
        // compose torsion action along reduced words
        let k = zk_orders.len();
        let idmat: Vec<Vec<i64>> = (0..k)
            .map(|i| (0..k).map(|j| i64::from(i == j)).collect())
            .collect();
        let mut tors_mats = Vec::with_capacity(n);
        for w in 0..n {
            let mut m = idmat.clone();
            for &s in w0.word(w as W0Idx) {
                m = tors_matmul(&tors_gen_mats[s], &m);
            }
            tors_mats.push(m);
        }
        let d = Datum {
            name,
            rs,
            w0,
            zk_orders,
            tors_gen_mats,
            tors_mats,
            ns_squares,
            affine_lifts,
            lambda_aff_gens,
            q,
            prime,
            c_fin,
            c_aff,
            digest,
            tau_memo: Mutex::new(HashMap::new()),
            levis: Mutex::new(HashMap::new()),
            self_ref: OnceLock::new(),
        };
        d.validate()?;
        let arc = Arc::new(d);
        arc.self_ref.set(Arc::downgrade(&arc)).ok();
        Ok(arc)
    }

    fn validate(&self) -> Result<()> {
        let nd = self.rs.num_simple();
        let k = self.zk_orders.len();
        if self.ns_squares.len() != nd || self.c_fin.len() != nd || self.lambda_aff_gens.len() != nd
        {
            return Err(Error::Config("per-simple-root data has wrong length".into()));
        }
        if self.affine_lifts.len() != self.rs.components.len()
            || self.c_aff.len() != self.rs.components.len()
        {
            return Err(Error::Config("per-component data has wrong length".into()));
        }
        if self.zk_orders.iter().any(|&d| d == 0) {
            return Err(Error::Config("zkappa orders must be positive".into()));
        }
        // q must be a power of the prime
        if !crate::ring::is_prime(self.prime) {
            return Err(Error::Config(format!("{} is not prime", self.prime)));
        }
        let mut qq = self.q;
        while qq > 1 && qq % self.prime == 0 {
            qq /= self.prime;
        }
        if qq != 1 || self.q < 2 {
            return Err(Error::Config(format!(
                "q = {} is not a positive power of p = {}",
                self.q, self.prime
            )));
        }
        // torsion action well defined mod orders and respecting relations
        for (s, m) in self.tors_gen_mats.iter().enumerate() {
            if m.len() != k || m.iter().any(|row| row.len() != k) {
                return Err(Error::Config(format!("torsion action matrix {s} has wrong shape")));
            }
            for (i, row) in m.iter().enumerate() {
                for (j, &e) in row.iter().enumerate() {
                    if (e * self.zk_orders[j] as i64) % self.zk_orders[i] as i64 != 0 {
                        return Err(Error::Config(format!(
                            "torsion action matrix {s} not well defined mod orders at ({i},{j})"
                        )));
                    }
                }
            }
        }
        // homomorphy of the composed action: mat(ab) = mat(a)mat(b) mod orders
        for a in 0..self.w0.order() {
            for b in 0..self.w0.order() {
                let ab = self.w0.mul(a as W0Idx, b as W0Idx);
                let composed = tors_matmul(&self.tors_mats[a], &self.tors_mats[b]);
                if !self.tors_mat_eq(&composed, &self.tors_mats[ab as usize]) {
                    return Err(Error::Config(
                        "torsion action does not factor through W_0 (braid relations violated)"
                            .into(),
                    ));
                }
            }
        }
        // t_s fixed by s
        for (s, ts) in self.ns_squares.iter().enumerate() {
            if ts.len() != k {
                return Err(Error::Config("ns_squares entry has wrong length".into()));
            }
            let acted = self.apply_tors_mat(&self.tors_gen_mats[s], ts);
            if &acted != ts {
                return Err(Error::Config(format!(
                    "n_s^2 for simple root {s} is not fixed by s"
                )));
            }
        }
        // lift cocycle well defined: braid words of the two sides agree
        for i in 0..nd {
            for j in (i + 1)..nd {
                let m = coxeter_order(&self.rs, i, j);
                if m == 0 {
                    continue; // infinite order cannot occur in finite W_0
                }
                let left = self.letter_chain(&[i, j].repeat(m as usize)[..m as usize]);
                let right = self.letter_chain(&[j, i].repeat(m as usize)[..m as usize]);
                if left != right {
                    return Err(Error::Config(format!(
                        "lift braid relation fails for simple roots ({i},{j})"
                    )));
                }
            }
        }
        // c validation: sums, support, equivariance
        for (s, c) in self.c_fin.iter().enumerate() {
            let sum: i64 = c.iter().map(|(_, m)| m).sum();
            if sum != self.q as i64 - 1 {
                return Err(Error::Config(format!(
                    "sum of c_s({s}) is {sum}, expected q - 1 = {} (expansion of the parameter c)",
                    self.q - 1
                )));
            }
            let sub = self.laff_alpha_lattice(s);
            for (t, _) in c {
                let v = self.embed_tors(t);
                if !sub.contains(&v) {
                    return Err(Error::Config(format!(
                        "c for simple root {s} is supported outside Z_κ ∩ W_aff,P_α(1)"
                    )));
                }
            }
        }
        for (ci, c) in self.c_aff.iter().enumerate() {
            let sum: i64 = c.iter().map(|(_, m)| m).sum();
            if sum != self.q as i64 - 1 {
                return Err(Error::Config(format!(
                    "sum of affine c (component {ci}) is {sum}, expected q - 1 = {}",
                    self.q - 1
                )));
            }
        }
        // affine lifts: free part must be the highest coroot
        for (ci, l) in self.affine_lifts.iter().enumerate() {
            let theta = self.rs.highest[ci];
            if l.free != self.rs.roots[theta].coroot {
                return Err(Error::Config(format!(
                    "affine lift for component {ci} does not translate by the highest coroot"
                )));
            }
        }
        // lambda_aff: W_0-stability of the generated subgroup, and the free
        // image must be the full coroot lattice
        let full = self.laff_lattice(delta_full(nd));
        for gens in &self.lambda_aff_gens {
            for g in gens {
                for w in 0..self.w0.order() {
                    let acted = self.conj_lambda(w as W0Idx, g);
                    if !full.contains(&self.embed_lambda(&acted)) {
                        return Err(Error::Config(
                            "lambda_aff generators do not span a W_0-stable subgroup".into(),
                        ));
                    }
                }
            }
        }
        let coroot_rows: Vec<Vec<i64>> = self
            .rs
            .positive()
            .map(|(_, r)| r.coroot.clone())
            .collect();
        let qv = SubLattice::from_gens(self.rs.rank_lattice, &coroot_rows);
        let free_rows: Vec<Vec<i64>> = self
            .lambda_aff_gens
            .iter()
            .flatten()
            .map(|l| l.free.clone())
            .collect();
        let free_img = SubLattice::from_gens(self.rs.rank_lattice, &free_rows);
        if !free_img.eq_lattice(&qv) {
            return Err(Error::Config(
                "free image of lambda_aff generators is not the coroot lattice".into(),
            ));
        }
        Ok(())
    }

    fn arc(&self) -> Arc<Datum> {
        self.self_ref
            .get()
            .and_then(|w| w.upgrade())
            .expect("datum constructed through Datum::new")
    }

    // -- torsion helpers ----------------------------------------------------

    pub fn tors_zero(&self) -> Vec<u32> {
        vec![0; self.zk_orders.len()]
    }
    pub fn tors_add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(b)
            .zip(&self.zk_orders)
            .map(|((x, y), &d)| (x + y) % d)
            .collect()
    }
    pub fn tors_neg(&self, a: &[u32]) -> Vec<u32> {
        a.iter()
            .zip(&self.zk_orders)
            .map(|(x, &d)| (d - x % d) % d)
            .collect()
    }
    fn apply_tors_mat(&self, m: &[Vec<i64>], t: &[u32]) -> Vec<u32> {
        m.iter()
            .zip(&self.zk_orders)
            .map(|(row, &d)| {
                let s: i64 = row.iter().zip(t).map(|(&e, &x)| e * x as i64).sum();
                (s.rem_euclid(d as i64)) as u32
            })
            .collect()
    }
    fn tors_mat_eq(&self, a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
        a.iter()
            .zip(b)
            .zip(&self.zk_orders)
            .all(|((ra, rb), &d)| {
                ra.iter()
                    .zip(rb)
                    .zip(&self.zk_orders)
                    .all(|((&x, &y), &dj)| {
                        // equality as maps Z/dj -> Z/d
                        let _ = dj;
                        (x - y).rem_euclid(d as i64) == 0
                    })
            })
    }

    /// Conjugation action `n_w · λ · n_w^{-1}` on `Λ(1)`.
    pub fn conj_lambda(&self, w: W0Idx, l: &Lambda) -> Lambda {
        Lambda {
            free: self.w0.apply_vec(w, &l.free),
            tors: self.apply_tors_mat(&self.tors_mats[w as usize], &l.tors),
        }
    }

    pub fn lambda_mul(&self, a: &Lambda, b: &Lambda) -> Lambda {
        Lambda {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            tors: self.tors_add(&a.tors, &b.tors),
        }
    }
    pub fn lambda_inv(&self, a: &Lambda) -> Lambda {
        Lambda {
            free: a.free.iter().map(|x| -x).collect(),
            tors: self.tors_neg(&a.tors),
        }
    }
    pub fn lambda_pow(&self, a: &Lambda, n: i64) -> Lambda {
        let mut acc = self.lambda_id();
        let (base, cnt) = if n >= 0 {
            (a.clone(), n)
        } else {
            (self.lambda_inv(a), -n)
        };
        for _ in 0..cnt {
            acc = self.lambda_mul(&acc, &base);
        }
        acc
    }
    pub fn lambda_id(&self) -> Lambda {
        Lambda {
            free: vec![0; self.rs.rank_lattice],
            tors: self.tors_zero(),
        }
    }
    fn embed_lambda(&self, l: &Lambda) -> Vec<i64> {
        let mut v = l.free.clone();
        v.extend(l.tors.iter().map(|&x| x as i64));
        v
    }
    fn embed_tors(&self, t: &[u32]) -> Vec<i64> {
        let mut v = vec![0i64; self.rs.rank_lattice];
        v.extend(t.iter().map(|&x| x as i64));
        v
    }

    // -- the cocycle and the group law ---------------------------------------

    /// `τ(a, b) ∈ Z_κ` with `n_a n_b = n_{ab} · τ(a, b)`.
    pub fn tau(&self, a: W0Idx, b: W0Idx) -> Vec<u32> {
        if let Some(t) = self.tau_memo.lock().unwrap().get(&(a, b)) {
            return t.clone();
        }
        // walk the letters of b
        let mut w = a;
        let mut t = self.tors_zero();
        for &s in self.w0.word(b).to_vec().iter() {
            let s_elt = self.simple_idx(s);
            let ws = self.w0.mul(w, s_elt);
            // move t across n_s: t·n_s = n_s·(s·t)
            t = self.apply_tors_mat(&self.tors_gen_mats[s], &t);
            if self.w0.len(ws) > self.w0.len(w) {
                w = ws;
            } else {
                t = self.tors_add(&self.ns_squares[s], &t);
                w = ws;
            }
        }
        debug_assert_eq!(w, self.w0.mul(a, b));
        self.tau_memo.lock().unwrap().insert((a, b), t.clone());
        t
    }

    /// Chain of letters applied to the identity state, for validation.
    fn letter_chain(&self, letters: &[usize]) -> (W0Idx, Vec<u32>) {
        let mut w: W0Idx = 0;
        let mut t = self.tors_zero();
        for &s in letters {
            let s_elt = self.simple_idx(s);
            let ws = self.w0.mul(w, s_elt);
            t = self.apply_tors_mat(&self.tors_gen_mats[s], &t);
            if self.w0.len(ws) <= self.w0.len(w) {
                t = self.tors_add(&self.ns_squares[s], &t);
            }
            w = ws;
        }
        (w, t)
    }

    /// Index of the simple reflection `s_i` in the `W_0` table.
    pub fn simple_idx(&self, i: usize) -> W0Idx {
        (0..self.w0.order() as W0Idx)
            .find(|&w| self.w0.word(w) == [i])
            .expect("simple reflection in table")
    }

    pub fn w1_id(&self) -> W1Elt {
        W1Elt {
            v: 0,
            lam: self.lambda_id(),
        }
    }
    pub fn w1_lambda(&self, l: Lambda) -> W1Elt {
        W1Elt { v: 0, lam: l }
    }
    pub fn w1_nv(&self, v: W0Idx) -> W1Elt {
        W1Elt {
            v,
            lam: self.lambda_id(),
        }
    }

    /// Group law: `(n_a λ)(n_b μ) = n_{ab} · τ(a,b) · (b^{-1}·λ) · μ`.
    pub fn w1_mul(&self, x: &W1Elt, y: &W1Elt) -> W1Elt {
        let binv = self.w0.inv(y.v);
        let conj = self.conj_lambda(binv, &x.lam);
        let mut lam = self.lambda_mul(&conj, &y.lam);
        lam.tors = self.tors_add(&self.tau(x.v, y.v), &lam.tors);
        W1Elt {
            v: self.w0.mul(x.v, y.v),
            lam,
        }
    }

    pub fn w1_inv(&self, x: &W1Elt) -> W1Elt {
        let vinv = self.w0.inv(x.v);
        // (n_v λ)^{-1} = n_{v^{-1}} · τ(v, v^{-1})^{-1} · (v·λ^{-1})
        let mut lam = self.conj_lambda(x.v, &self.lambda_inv(&x.lam));
        lam.tors = self.tors_add(&self.tors_neg(&self.tau(x.v, vinv)), &lam.tors);
        W1Elt { v: vinv, lam }
    }

    /// Conjugation `w · x · w^{-1}` for arbitrary `w, x ∈ W(1)`.
    pub fn w1_conj(&self, w: &W1Elt, x: &W1Elt) -> W1Elt {
        self.w1_mul(&self.w1_mul(w, x), &self.w1_inv(w))
    }

    pub fn w1_pow(&self, x: &W1Elt, n: i64) -> W1Elt {
        let mut acc = self.w1_id();
        let (base, cnt) = if n >= 0 {
            (x.clone(), n)
        } else {
            (self.w1_inv(x), -n)
        };
        for _ in 0..cnt {
            acc = self.w1_mul(&acc, &base);
        }
        acc
    }

    // -- Levi registry --------------------------------------------------------

    pub fn levi(&self, delta: DeltaSet) -> Arc<LeviCtx> {
        if let Some(l) = self.levis.lock().unwrap().get(&delta) {
            return l.clone();
        }
        let ctx = Arc::new(LeviCtx::build(self.arc(), delta));
        self.levis.lock().unwrap().insert(delta, ctx.clone());
        ctx
    }

    pub fn full_delta(&self) -> DeltaSet {
        delta_full(self.rs.num_simple())
    }

    /// Lattice of `Λ(1) ∩ W_{aff,M}(1)` for the Levi `Δ_M`, with `t_s` and
    /// the affine-lift translations included and closed under `W_{0,M}`.
    pub fn laff_lattice(&self, delta: DeltaSet) -> SubLattice {
        let dim = self.rs.rank_lattice + self.zk_orders.len();
        let mut gens: Vec<Vec<i64>> = Vec::new();
        for (i, &d) in self.zk_orders.iter().enumerate() {
            let mut v = vec![0i64; dim];
            v[self.rs.rank_lattice + i] = d as i64;
            gens.push(v);
        }
        let mut raw: Vec<Lambda> = Vec::new();
        for a in delta_iter(delta, self.rs.num_simple()) {
            raw.extend(self.lambda_aff_gens[a].iter().cloned());
            raw.push(Lambda {
                free: vec![0; self.rs.rank_lattice],
                tors: self.ns_squares[a].iter().map(|&x| x).collect(),
            });
        }
        // close under the W_0 elements generated by delta
        let w0m = self.w0_subgroup(delta);
        for l in raw {
            for &w in &w0m {
                gens.push(self.embed_lambda(&self.conj_lambda(w, &l)));
            }
        }
        SubLattice::from_gens(dim, &gens)
    }

    fn laff_alpha_lattice(&self, alpha: usize) -> SubLattice {
        self.laff_lattice(1 << alpha)
    }

    /// Membership of a torsion element in `Z_κ ∩ W_{aff,M}(1)`.
    pub fn tors_in_laff(&self, delta: DeltaSet, t: &[u32]) -> bool {
        self.laff_lattice(delta).contains(&self.embed_tors(t))
    }

    /// Elements of the parabolic subgroup `W_{0,M}` generated by `Δ_M`.
    pub fn w0_subgroup(&self, delta: DeltaSet) -> Vec<W0Idx> {
        let mut seen = vec![false; self.w0.order()];
        seen[0] = true;
        let mut out = vec![0 as W0Idx];
        let mut head = 0;
        while head < out.len() {
            let w = out[head];
            head += 1;
            for s in delta_iter(delta, self.rs.num_simple()) {
                let ws = self.w0.mul(w, self.simple_idx(s));
                if !seen[ws as usize] {
                    seen[ws as usize] = true;
                    out.push(ws);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn tors_matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let k = a.len();
    let mut out = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            out[i][j] = (0..k).map(|l| a[i][l] * b[l][j]).sum();
        }
    }
    out
}

fn coxeter_order(rs: &RootSystem, i: usize, j: usize) -> u32 {
    // m_ij from the Cartan entries (crystallographic cases only)
    match rs.cartan[i][j] * rs.cartan[j][i] {
        0 => 2,
        1 => 3,
        2 => 4,
        3 => 6,
        _ => 0,
    }
}

// ---------------------------------------------------------------------------
// Levi context

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LetterKind {
    Fin(usize),
    Aff(usize),
}

#[derive(Clone, Debug)]
pub struct Letter {
    pub kind: LetterKind,
    pub lift: W1Elt,
    pub lift_inv: W1Elt,
    /// `c` of the lift, and of the inverse lift.
    pub c: CFunc,
    pub c_inv: CFunc,
    pub w0img: W0Idx,
    /// The gradient root deciding orientation crossings: `α` for finite
    /// letters, the component's highest root for affine ones.
    pub grad: RootIdx,
}

/// All structure relative to one Levi subset `Δ_M`.
pub struct LeviCtx {
    pub datum: Arc<Datum>,
    pub delta: DeltaSet,
    /// Positive roots of `Σ_M` (global indices).
    pub pos_roots: Vec<RootIdx>,
    /// Elements of `W_{0,M}`, sorted.
    pub w0m: Vec<W0Idx>,
    w0m_mask: Vec<bool>,
    /// Irreducible components of `Δ_M` (lists of global simple indices).
    pub components: Vec<Vec<usize>>,
    /// Highest root of each component inside `Σ_M`.
    pub comp_highest: Vec<RootIdx>,
    pub letters: Vec<Letter>,
    /// Length-zero generators of the free part of `Ω_M(1)`, keyed by the
    /// lattice basis vector whose class they represent (`None` = trivial).
    pub omega_gens: Vec<Option<W1Elt>>,
    /// Longest element of `W_{0,M}`.
    pub w_longest: W0Idx,
    /// Coroot lattice of `Σ_M`.
    qm_lattice: SubLattice,
    central_memo: Mutex<HashMap<(DeltaSet, bool), W1Elt>>,
}

impl std::fmt::Debug for LeviCtx {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "LeviCtx({}, {:#b})", self.datum.name, self.delta)
    }
}

impl LeviCtx {
    fn build(datum: Arc<Datum>, delta: DeltaSet) -> LeviCtx {
        let rs = &datum.rs;
        let nd = rs.num_simple();
        assert!(delta_subset(delta, delta_full(nd)), "delta out of range");
        let pos_roots: Vec<RootIdx> = rs
            .positive()
            .filter(|(_, r)| {
                r.delta_coords
                    .iter()
                    .enumerate()
                    .all(|(i, &c)| c == 0 || delta_contains(delta, i))
            })
            .map(|(i, _)| i)
            .collect();
        let w0m = datum.w0_subgroup(delta);
        let mut w0m_mask = vec![false; datum.w0.order()];
        for &w in &w0m {
            w0m_mask[w as usize] = true;
        }
        // components of delta
        let mut comp_of = vec![usize::MAX; nd];
        let mut components: Vec<Vec<usize>> = Vec::new();
        for i in delta_iter(delta, nd) {
            if comp_of[i] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut stack = vec![i];
            comp_of[i] = id;
            let mut comp = vec![];
            while let Some(x) = stack.pop() {
                comp.push(x);
                for j in delta_iter(delta, nd) {
                    if comp_of[j] == usize::MAX && rs.cartan[x][j] != 0 {
                        comp_of[j] = id;
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        // highest root per component within Sigma_M
        let comp_highest: Vec<RootIdx> = components
            .iter()
            .map(|comp| {
                pos_roots
                    .iter()
                    .copied()
                    .filter(|&ri| {
                        rs.roots[ri]
                            .delta_coords
                            .iter()
                            .enumerate()
                            .all(|(i, &c)| c == 0 || comp.contains(&i))
                    })
                    .max_by_key(|&ri| rs.roots[ri].delta_coords.iter().sum::<i64>())
                    .expect("component has roots")
            })
            .collect();
        // longest element of W_{0,M}: maximal length within the subgroup
        let w_longest = w0m
            .iter()
            .copied()
            .max_by_key(|&w| datum.w0.len(w))
            .unwrap_or(0);
        let coroot_rows: Vec<Vec<i64>> = pos_roots
            .iter()
            .map(|&ri| rs.roots[ri].coroot.clone())
            .collect();
        let qm_lattice = SubLattice::from_gens(rs.rank_lattice, &coroot_rows);
        let mut ctx = LeviCtx {
            datum: datum.clone(),
            delta,
            pos_roots,
            w0m,
            w0m_mask,
            components,
            comp_highest,
            letters: vec![],
            omega_gens: vec![],
            w_longest,
            qm_lattice,
            central_memo: Mutex::new(HashMap::new()),
        };
        ctx.letters = ctx.make_letters();
        ctx.omega_gens = ctx.make_omega_gens();
        ctx
    }

    fn make_letters(&self) -> Vec<Letter> {
        let d = &self.datum;
        let mut out = Vec::new();
        for a in delta_iter(self.delta, d.rs.num_simple()) {
            let lift = d.w1_nv(d.simple_idx(a));
            let lift_inv = d.w1_inv(&lift);
            let c = d.c_fin[a].clone();
            let c_inv = shift_cfunc(d, &c, &d.tors_neg(&d.ns_squares[a]));
            out.push(Letter {
                kind: LetterKind::Fin(a),
                lift,
                lift_inv,
                c,
                c_inv,
                w0img: d.simple_idx(a),
                grad: a, // simple root index == its root index in Σ^+ ordering? no — look up
            });
        }
        // fix grad for finite letters: index of the simple root in the root list
        for l in out.iter_mut() {
            if let LetterKind::Fin(a) = l.kind {
                l.grad = d
                    .rs
                    .root_index(&d.rs.simple_roots[a])
                    .expect("simple root in list");
            }
        }
        for (ci, comp) in self.components.iter().enumerate() {
            let theta = self.comp_highest[ci];
            // reuse the configured lift when this component is a full-system component
            let full_comp = d
                .rs
                .components
                .iter()
                .position(|c| c == comp)
                .filter(|&fc| d.rs.highest[fc] == theta);
            let (lam_theta, c_here) = if let Some(fc) = full_comp {
                (d.affine_lifts[fc].clone(), Some(d.c_aff[fc].clone()))
            } else {
                (
                    Lambda {
                        free: d.rs.roots[theta].coroot.clone(),
                        tors: d.tors_zero(),
                    },
                    None,
                )
            };
            let s_theta = self.reflection_of_root(theta);
            let lift = d.w1_mul(&d.w1_lambda(lam_theta), &d.w1_nv(s_theta));
            let lift_inv = d.w1_inv(&lift);
            let c = match c_here {
                Some(c) => c,
                None => self
                    .resolve_c(&lift)
                    .expect("affine c resolvable by conjugation"),
            };
            // c_inv = c_{t^{-1}·lift} with t = lift², a torsion element
            let sq = d.w1_mul(&lift, &lift);
            assert!(sq.is_torsion(), "affine letter squared must be torsion");
            let c_inv = shift_cfunc(d, &c, &d.tors_neg(&sq.lam.tors));
            out.push(Letter {
                kind: LetterKind::Aff(ci),
                lift,
                lift_inv,
                c,
                c_inv,
                w0img: s_theta,
                grad: theta,
            });
        }
        out
    }

    /// `W_0` index of the reflection `s_β` for a positive root `β`.
    pub fn reflection_of_root(&self, beta: RootIdx) -> W0Idx {
        let d = &self.datum;
        let neg = beta + d.rs.num_positive;
        (0..d.w0.order() as W0Idx)
            .find(|&w| {
                d.w0.apply_root(w, beta) == neg
                    && d.rs.positive().all(|(i, _)| {
                        i == beta || {
                            let img = d.w0.apply_root(w, i);
                            // s_beta permutes Σ^+ \ {β}
                            img < d.rs.num_positive || img == neg
                        }
                    })
            })
            .expect("reflection exists")
    }

    /// Resolve `c` of a reflection lift by conjugating it into a letter of
    /// the full system: `c_{u s̃ u^{-1}} = u · c_{s̃}` and `c_{t s̃} = t · c_{s̃}`.
    pub fn resolve_c(&self, target: &W1Elt) -> Result<CFunc> {
        let d = &self.datum;
        let full = d.levi(d.full_delta());
        // BFS over conjugators built from canonical letters of the full system
        let mut frontier: Vec<W1Elt> = vec![d.w1_id()];
        let mut seen: Vec<(W0Idx, Vec<i64>)> = vec![(0, vec![0; d.rs.rank_lattice])];
        for _depth in 0..14 {
            let mut next = Vec::new();
            for u in &frontier {
                for l in &full.letters {
                    let u2 = d.w1_mul(&l.lift, u);
                    let key = (u2.v, u2.lam.free.clone());
                    if seen.contains(&key) {
                        continue;
                    }
                    seen.push(key);
                    next.push(u2);
                }
            }
            for u in frontier.iter().chain(&next) {
                for l in &full.letters {
                    let cand = d.w1_conj(u, &l.lift);
                    // same W-image as target?
                    if cand.v == target.v && cand.lam.free == target.lam.free {
                        let rho = d.w1_mul(target, &d.w1_inv(&cand));
                        if rho.is_torsion() {
                            // c_target = rho · (u · c_letter)
                            let uimg = u.v;
                            let mut out: CFunc = Vec::new();
                            for (t, m) in &l.c {
                                let t2 = d
                                    .conj_lambda(
                                        uimg,
                                        &Lambda {
                                            free: vec![0; d.rs.rank_lattice],
                                            tors: t.clone(),
                                        },
                                    )
                                    .tors;
                                let t3 = d.tors_add(&rho.lam.tors, &t2);
                                out.push((t3, *m));
                            }
                            return Ok(merge_cfunc(out));
                        }
                    }
                }
            }
            frontier = next;
            if frontier.is_empty() {
                break;
            }
        }
        Err(Error::Config(
            "could not express affine reflection as a conjugate of a simple one".into(),
        ))
    }

    fn make_omega_gens(&self) -> Vec<Option<W1Elt>> {
        let d = &self.datum;
        let r = d.rs.rank_lattice;
        let mut out = Vec::with_capacity(r);
        for i in 0..r {
            let mut e = vec![0i64; r];
            e[i] = 1;
            if self.qm_lattice.contains(&e) {
                out.push(None);
                continue;
            }
            out.push(Some(self.find_length0_in_class(&e).unwrap_or_else(|| {
                panic!("no length-zero representative for lattice class e_{i}")
            })));
        }
        out
    }

    /// Search a length-zero element of `W_M(1)` whose free part is congruent
    /// to `class` modulo the coroot lattice of `Σ_M`.
    fn find_length0_in_class(&self, class: &[i64]) -> Option<W1Elt> {
        let d = &self.datum;
        // candidate translations: class + small combinations of M-coroots
        let coroots: Vec<Vec<i64>> = self
            .pos_roots
            .iter()
            .map(|&ri| d.rs.roots[ri].coroot.clone())
            .collect();
        let mut candidates: Vec<Vec<i64>> = vec![class.to_vec()];
        for _ in 0..2 {
            let mut more = vec![];
            for c in &candidates {
                for co in &coroots {
                    for sgn in [1i64, -1] {
                        let v: Vec<i64> =
                            c.iter().zip(co).map(|(x, y)| x + sgn * y).collect();
                        if !candidates.contains(&v) && !more.contains(&v) {
                            more.push(v);
                        }
                    }
                }
            }
            candidates.extend(more);
        }
        for mu in &candidates {
            for &v in &self.w0m {
                let w = W1Elt {
                    v,
                    lam: Lambda {
                        free: mu.clone(),
                        tors: d.tors_zero(),
                    },
                };
                if self.len(&w) == 0 {
                    return Some(w);
                }
            }
        }
        None
    }

    // -- lengths --------------------------------------------------------------

    /// The length of `n_v λ` relative to this Levi, by the root-sum formula.
    pub fn len(&self, w: &W1Elt) -> u64 {
        let d = &self.datum;
        let mut total: i64 = 0;
        for &ri in &self.pos_roots {
            let img = d.w0.apply_root(w.v, ri);
            let pairing = dot(&d.rs.roots[ri].covec, &w.lam.free);
            if d.rs.roots[img].positive {
                total += pairing.abs();
            } else {
                total += (pairing + 1).abs();
            }
        }
        total as u64
    }

    /// `(ℓ(a) + ℓ(b) − ℓ(ab)) / 2`, asserted to be a nonnegative integer.
    pub fn q_half_exponent(&self, a: &W1Elt, b: &W1Elt) -> u64 {
        let ab = self.datum.w1_mul(a, b);
        let defect = self.len(a) as i64 + self.len(b) as i64 - self.len(&ab) as i64;
        assert!(
            defect >= 0 && defect % 2 == 0,
            "length defect {defect} not an even nonnegative integer (length bug)"
        );
        (defect / 2) as u64
    }

    pub fn in_w0m(&self, v: W0Idx) -> bool {
        self.w0m_mask[v as usize]
    }
    pub fn in_wm1(&self, w: &W1Elt) -> bool {
        self.in_w0m(w.v)
    }

    // -- positivity -----------------------------------------------------------

    /// Positive roots of `Σ_M` outside `Σ_P`.
    pub fn pos_outside(&self, p: DeltaSet) -> Vec<RootIdx> {
        let sub = self.datum.levi(p);
        self.pos_roots
            .iter()
            .copied()
            .filter(|ri| !sub.pos_roots.contains(ri))
            .collect()
    }

    /// `P`-positivity: `⟨α, ν(λ)⟩ ≤ 0` on `Σ_M^+ \ Σ_P^+` (paper convention).
    pub fn is_p_positive(&self, p: DeltaSet, w: &W1Elt) -> Result<bool> {
        self.check_in_wp(p, w)?;
        Ok(self
            .pos_outside(p)
            .iter()
            .all(|&ri| dot(&self.datum.rs.roots[ri].covec, &w.lam.free) <= 0))
    }

    pub fn is_p_negative(&self, p: DeltaSet, w: &W1Elt) -> Result<bool> {
        self.check_in_wp(p, w)?;
        Ok(self
            .pos_outside(p)
            .iter()
            .all(|&ri| dot(&self.datum.rs.roots[ri].covec, &w.lam.free) >= 0))
    }

    fn check_in_wp(&self, p: DeltaSet, w: &W1Elt) -> Result<()> {
        let sub = self.datum.levi(p);
        if !sub.in_w0m(w.v) {
            return Err(Error::Domain(format!(
                "element with W_0-part {:?} is not in W_P(1) for Δ_P = {:#b}",
                self.datum.w0.word(w.v),
                p
            )));
        }
        Ok(())
    }

    // -- central elements λ_P^± ------------------------------------------------

    /// A central element of `W_P(1)` with strictly negative (sign `Plus`,
    /// the element `λ_P^+`) or strictly positive (sign `Minus`, `λ_P^-`)
    /// pairings against `Σ_M^+ \ Σ_P^+`.  Follows the existence proof: start
    /// from a dominant-regular-enough `λ_0`, then raise to the power that
    /// makes conjugation by every `n_w`, `w ∈ W_{0,P}`, fix it.
    pub fn central_lambda(&self, p: DeltaSet, sign: Sign) -> W1Elt {
        let key = (p, sign == Sign::Plus);
        if let Some(l) = self.central_memo.lock().unwrap().get(&key) {
            return l.clone();
        }
        let d = &self.datum;
        let nd = d.rs.num_simple();
        // solve <alpha_i, x> = 0 for i in P, = -1 for i in M \ P (rationally),
        // then clear denominators
        let rows: Vec<Vec<i64>> = delta_iter(self.delta, nd)
            .map(|i| d.rs.simple_roots[i].clone())
            .collect();
        let rhs: Vec<i64> = delta_iter(self.delta, nd)
            .map(|i| if delta_contains(p, i) { 0 } else { -1 })
            .collect();
        let x = solve_rational_scaled(&rows, &rhs)
            .expect("simple roots are linearly independent");
        let x = match sign {
            Sign::Plus => x,
            Sign::Minus => x.iter().map(|v| -v).collect(),
        };
        let lam0 = Lambda {
            free: x,
            tors: d.tors_zero(),
        };
        // power up until central in W_P(1)
        let sub = d.levi(p);
        let mut k = 1i64;
        let lam = loop {
            let cand = d.lambda_pow(&lam0, k);
            let central = sub
                .w0m
                .iter()
                .all(|&w| d.conj_lambda(w, &cand) == cand);
            if central {
                break cand;
            }
            k += 1;
            assert!(k < 10_000, "central lambda search did not terminate");
        };
        let out = d.w1_lambda(lam);
        self.central_memo.lock().unwrap().insert(key, out.clone());
        out
    }

    // -- letters, descents, reduced words ---------------------------------------

    /// Lex-first letter `s̃` with `ℓ(s̃^{-1} w) < ℓ(w)`.
    pub fn left_descent(&self, w: &W1Elt) -> Option<usize> {
        let lw = self.len(w);
        if lw == 0 {
            return None;
        }
        (0..self.letters.len()).find(|&i| {
            self.len(&self.datum.w1_mul(&self.letters[i].lift_inv, w)) < lw
        })
    }

    /// Peel left descents: returns letters `[i₁, …, i_l]` and a length-zero
    /// residue `u` with `w = s̃_{i₁} ⋯ s̃_{i_l} · u` and `l = ℓ(w)`.
    pub fn reduced_letters(&self, w: &W1Elt) -> (Vec<usize>, W1Elt) {
        let mut rest = w.clone();
        let mut out = Vec::new();
        while let Some(i) = self.left_descent(&rest) {
            rest = self.datum.w1_mul(&self.letters[i].lift_inv, &rest);
            out.push(i);
        }
        debug_assert_eq!(self.len(&rest), 0);
        (out, rest)
    }

    /// Canonical lift of a torsion-free `W`-image: the letter product along
    /// a reduced word, together with the length-zero remainder of the image.
    fn canonical_lift(&self, w_img: &W1Elt) -> (W1Elt, W1Elt) {
        let stripped = W1Elt {
            v: w_img.v,
            lam: Lambda {
                free: w_img.lam.free.clone(),
                tors: self.datum.tors_zero(),
            },
        };
        let (letters, rest) = self.reduced_letters(&stripped);
        let mut lift = self.datum.w1_id();
        for i in letters {
            lift = self.datum.w1_mul(&lift, &self.letters[i].lift);
        }
        (lift, rest)
    }

    // -- Bruhat orders -----------------------------------------------------------

    fn strip(&self, w: &W1Elt) -> W1Elt {
        W1Elt {
            v: w.v,
            lam: Lambda {
                free: w.lam.free.clone(),
                tors: self.datum.tors_zero(),
            },
        }
    }

    /// Decompose the `W`-image as `a · ω` with `a ∈ W_{aff,M}` and `ω` of
    /// length zero; returns `ω`.
    fn omega_part(&self, w: &W1Elt) -> W1Elt {
        let d = &self.datum;
        let mut omega = d.w1_id();
        for (i, g) in self.omega_gens.iter().enumerate() {
            if let Some(g) = g {
                let e = w.lam.free[i];
                if e != 0 {
                    omega = d.w1_mul(&omega, &d.w1_pow(g, e));
                }
            }
        }
        // the remaining class must be zero; check
        let a = d.w1_mul(&self.strip(w), &d.w1_inv(&omega));
        debug_assert!(self.qm_lattice.contains(&a.lam.free), "omega decomposition failed");
        self.strip(&omega)
    }

    /// Bruhat order on `W_M = W_{aff,M} ⋊ Ω_M` (on images; torsion ignored).
    pub fn bruhat_leq_w(&self, x: &W1Elt, y: &W1Elt) -> bool {
        let d = &self.datum;
        let (x, y) = (self.strip(x), self.strip(y));
        if !(self.in_w0m(x.v) && self.in_w0m(y.v)) {
            return false;
        }
        let quot = d.w1_mul(&x, &d.w1_inv(&y));
        if !self.qm_lattice.contains(&quot.lam.free) {
            return false;
        }
        let omega = self.omega_part(&y);
        let oi = d.w1_inv(&omega);
        let xa = self.strip(&d.w1_mul(&x, &oi));
        let ya = self.strip(&d.w1_mul(&y, &oi));
        self.bruhat_aff(&xa, &ya)
    }

    fn bruhat_aff(&self, x: &W1Elt, y: &W1Elt) -> bool {
        let lx = self.len(x);
        let ly = self.len(y);
        if lx > ly {
            return false;
        }
        if self.strip(x) == self.strip(y) {
            return true;
        }
        if ly == 0 {
            return false;
        }
        let s = self
            .left_descent(y)
            .expect("positive length has a descent");
        let d = &self.datum;
        let sy = self.strip(&d.w1_mul(&self.letters[s].lift_inv, y));
        let sx = self.strip(&d.w1_mul(&self.letters[s].lift_inv, x));
        if self.len(&sx) < lx {
            self.bruhat_aff(&sx, &sy)
        } else {
            self.bruhat_aff(x, &sy)
        }
    }

    /// Membership in `W_{aff,M}(1)`: image in `W_{aff,M}` and torsion residue
    /// against the canonical lift inside `Z_κ ∩ W_{aff,M}(1)`.
    pub fn in_waff1(&self, w: &W1Elt) -> bool {
        if !self.in_w0m(w.v) || !self.qm_lattice.contains(&w.lam.free) {
            return false;
        }
        let (lift, rest) = self.canonical_lift(w);
        if !rest.is_torsion() || rest.lam.tors.iter().any(|&t| t != 0) {
            // nontrivial Ω-part: not in the affine subgroup
            if !rest.is_torsion() {
                return false;
            }
        }
        let rho = self.datum.w1_mul(&self.datum.w1_inv(&lift), w);
        if !rho.is_torsion() {
            return false;
        }
        self.datum.tors_in_laff(self.delta, &rho.lam.tors)
    }

    /// Bruhat order on `W_M(1)`.
    pub fn bruhat_leq_w1(&self, x: &W1Elt, y: &W1Elt) -> bool {
        if x == y {
            return true;
        }
        let quot = self.datum.w1_mul(x, &self.datum.w1_inv(y));
        self.in_waff1(&quot) && self.bruhat_leq_w(x, y)
    }

    // -- coset representatives ------------------------------------------------

    /// Minimal representatives `W_{0,M}^P = {w : w(Δ_P) ⊂ Σ_M^+}`.
    pub fn coset_reps_left(&self, p: DeltaSet) -> Vec<W0Idx> {
        let d = &self.datum;
        let nd = d.rs.num_simple();
        let mut out: Vec<W0Idx> = self
            .w0m
            .iter()
            .copied()
            .filter(|&w| {
                delta_iter(p, nd).all(|a| {
                    let ri = d
                        .rs
                        .root_index(&d.rs.simple_roots[a])
                        .expect("simple root");
                    d.rs.roots[d.w0.apply_root(w, ri)].positive
                })
            })
            .collect();
        out.sort_by_key(|&w| (d.w0.len(w), d.w0.word(w).to_vec()));
        out
    }

    /// Minimal representatives `{}^P W_{0,M} = {w : w^{-1}(Δ_P) ⊂ Σ_M^+}`.
    pub fn coset_reps_right(&self, p: DeltaSet) -> Vec<W0Idx> {
        self.coset_reps_left(p)
            .into_iter()
            .map(|w| self.datum.w0.inv(w))
            .collect()
    }

    /// Factor `v = v₁ v₂` with `v₁ ∈ W_{0,M}^P` and `v₂ ∈ W_{0,P}`.
    pub fn factor_left(&self, p: DeltaSet, v: W0Idx) -> (W0Idx, W0Idx) {
        let d = &self.datum;
        let sub = d.levi(p);
        for &v1 in &self.coset_reps_left(p) {
            let v2 = d.w0.mul(d.w0.inv(v1), v);
            if sub.in_w0m(v2) {
                return (v1, v2);
            }
        }
        panic!("coset factorization failed");
    }

    /// Factor `v = v₂ v₃` with `v₂ ∈ W_{0,P}` and `v₃ ∈ {}^P W_{0,M}`.
    pub fn factor_right(&self, p: DeltaSet, v: W0Idx) -> (W0Idx, W0Idx) {
        let d = &self.datum;
        let sub = d.levi(p);
        for &v3 in &self.coset_reps_right(p) {
            let v2 = d.w0.mul(v, d.w0.inv(v3));
            if sub.in_w0m(v2) {
                return (v2, v3);
            }
        }
        panic!("coset factorization failed");
    }

    /// Longest element of `W_{0,P}` for `Δ_P ⊆ Δ_M`.
    pub fn longest_of(&self, p: DeltaSet) -> W0Idx {
        self.datum.levi(p).w_longest
    }

    /// The parabolic subset `Δ_{P'} = -w_M(Δ_P)` inside this Levi.
    pub fn opposite_parabolic(&self, p: DeltaSet) -> DeltaSet {
        let d = &self.datum;
        let nd = d.rs.num_simple();
        let wg = self.w_longest;
        let mut out: DeltaSet = 0;
        for a in delta_iter(p, nd) {
            let ri = d.rs.root_index(&d.rs.simple_roots[a]).expect("simple root");
            let img = d.w0.apply_root(wg, ri);
            // -w_M(α) is a simple root of Δ_M
            let neg = if img >= d.rs.num_positive {
                img - d.rs.num_positive
            } else {
                img + d.rs.num_positive
            };
            let covec = &d.rs.roots[neg].covec;
            let b = (0..nd)
                .find(|&i| &d.rs.simple_roots[i] == covec)
                .expect("-w_M permutes the simple roots of Δ_M");
            out |= 1 << b;
        }
        out
    }

    /// Canonical lift `n_{w_M w_P}` (letter product along a reduced word).
    pub fn n_wm_wp(&self, p: DeltaSet) -> W1Elt {
        let d = &self.datum;
        let w = d.w0.mul(self.w_longest, d.w0.inv(self.longest_of(p)));
        let (lift, rest) = self.canonical_lift(&d.w1_nv(w));
        debug_assert!(rest == d.w1_id());
        lift
    }

    /// Bounded set of elements of `W_M(1)` with torsion sampling, for tests.
    pub fn box_elements(&self, free_bound: i64, with_torsion: bool) -> Vec<W1Elt> {
        let d = &self.datum;
        let r = d.rs.rank_lattice;
        let mut frees: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..r {
            let mut next = vec![];
            for f in &frees {
                for x in -free_bound..=free_bound {
                    let mut g = f.clone();
                    g.push(x);
                    next.push(g);
                }
            }
            frees = next;
        }
        let torsions: Vec<Vec<u32>> = if with_torsion {
            let mut ts: Vec<Vec<u32>> = vec![vec![]];
            for &o in &d.zk_orders {
                let mut next = vec![];
                for t in &ts {
                    for x in 0..o {
                        let mut u = t.clone();
                        u.push(x);
                        next.push(u);
                    }
                }
                ts = next;
            }
            ts
        } else {
            vec![d.tors_zero()]
        };
        let mut out = Vec::new();
        for &v in &self.w0m {
            for f in &frees {
                for t in &torsions {
                    out.push(W1Elt {
                        v,
                        lam: Lambda {
                            free: f.clone(),
                            tors: t.clone(),
                        },
                    });
                }
            }
        }
        out
    }
}

/// Merge duplicate torsion keys in a `CFunc`.
pub fn merge_cfunc(mut c: CFunc) -> CFunc {
    c.sort();
    let mut out: CFunc = Vec::new();
    for (t, m) in c {
        if let Some(last) = out.last_mut() {
            if last.0 == t {
                last.1 += m;
                continue;
            }
        }
        out.push((t, m));
    }
    out.retain(|(_, m)| *m != 0);
    out
}

/// `(t·c)(x) = c(t^{-1} x)`: group-algebra multiplication by `T_t`.
fn shift_cfunc(d: &Datum, c: &CFunc, t: &[u32]) -> CFunc {
    merge_cfunc(
        c.iter()
            .map(|(x, m)| (d.tors_add(t, x), *m))
            .collect(),
    )
}

/// Solve `rows · x = rhs` over ℚ and scale to the smallest integral solution
/// proportional to it (all rhs entries scale together).
fn solve_rational_scaled(rows: &[Vec<i64>], rhs: &[i64]) -> Option<Vec<i64>> {
    let m = rows.len();
    if m == 0 {
        return Some(vec![]);
    }
    let n = rows[0].len();
    // Gaussian elimination over rationals stored as (num, den)
    let mut aug: Vec<Vec<(i64, i64)>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            let mut row: Vec<(i64, i64)> = r.iter().map(|&x| (x, 1)).collect();
            row.push((b, 1));
            row
        })
        .collect();
    let norm = |mut n: i64, mut d: i64| -> (i64, i64) {
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = crate::roots::gcd(n.unsigned_abs(), d.unsigned_abs()).max(1) as i64;
        (n / g, d / g)
    };
    let radd = |a: (i64, i64), b: (i64, i64)| norm(a.0 * b.1 + b.0 * a.1, a.1 * b.1);
    let rmul = |a: (i64, i64), b: (i64, i64)| norm(a.0 * b.0, a.1 * b.1);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(pr) = (r..m).find(|&i| aug[i][c].0 != 0) else {
            continue;
        };
        aug.swap(r, pr);
        let inv = (aug[r][c].1, aug[r][c].0);
        for x in aug[r].iter_mut() {
            *x = rmul(*x, inv);
        }
        for i in 0..m {
            if i != r && aug[i][c].0 != 0 {
                let f = aug[i][c];
                for j in 0..=n {
                    let t = rmul(f, aug[r][j]);
                    aug[i][j] = radd(aug[i][j], (-t.0, t.1));
                }
            }
        }
        pivots.push((r, c));
        r += 1;
        if r == m {
            break;
        }
    }
    if r < m {
        return None;
    }
    // particular solution with zeros on free variables
    let mut x: Vec<(i64, i64)> = vec![(0, 1); n];
    for &(pr, pc) in &pivots {
        x[pc] = aug[pr][n];
    }
    let lcm_den = x
        .iter()
        .map(|&(_, d)| d)
        .fold(1i64, |a, b| a / (crate::roots::gcd(a.unsigned_abs(), b.unsigned_abs()).max(1) as i64) * b);
    Some(x.iter().map(|&(nu, de)| nu * (lcm_den / de)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;

    #[test]
    fn sl2_p3_group_law() {
        let d = presets::preset("sl2-p3").unwrap();
        let full = d.levi(d.full_delta());
        // torsion subgroup adds
        let t = d.w1_lambda(Lambda {
            free: vec![0],
            tors: vec![1],
        });
        let tt = d.w1_mul(&t, &t);
        assert_eq!(tt, d.w1_id());
        // n_s · n_s = t_s
        let ns = d.w1_nv(d.simple_idx(0));
        let sq = d.w1_mul(&ns, &ns);
        assert!(sq.is_torsion());
        assert_eq!(sq.lam.tors, vec![1]);
        // lengths
        assert_eq!(full.len(&ns), 1);
        assert_eq!(full.len(&t), 0);
        let lam = d.w1_lambda(Lambda {
            free: vec![-1],
            tors: vec![0],
        });
        // ⟨α, ν(λ)⟩ = -2 gives length 2
        assert_eq!(full.len(&lam), 2);
    }

    #[test]
    fn a2_braid_of_lifts() {
        let d = presets::preset("a2-p2").unwrap();
        let n1 = d.w1_nv(d.simple_idx(0));
        let n2 = d.w1_nv(d.simple_idx(1));
        let lhs = d.w1_mul(&d.w1_mul(&n1, &n2), &n1);
        let rhs = d.w1_mul(&d.w1_mul(&n2, &n1), &n2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn central_lambda_signs() {
        let d = presets::preset("a2-p2").unwrap();
        let full = d.levi(d.full_delta());
        let p: DeltaSet = 0b01;
        let lam = full.central_lambda(p, Sign::Plus);
        // central in W_P(1)
        for &w in &d.levi(p).w0m {
            assert_eq!(d.conj_lambda(w, &lam.lam), lam.lam);
        }
        for &ri in &full.pos_outside(p) {
            assert!(dot(&d.rs.roots[ri].covec, &lam.lam.free) < 0);
        }
        // α1 pairing must vanish
        let a1 = d.rs.root_index(&d.rs.simple_roots[0]).unwrap();
        assert_eq!(dot(&d.rs.roots[a1].covec, &lam.lam.free), 0);
    }

    #[test]
    fn reduced_letters_reassemble() {
        let d = presets::preset("sl2-p3").unwrap();
        let full = d.levi(d.full_delta());
        for w in full.box_elements(2, true) {
            let (letters, rest) = full.reduced_letters(&w);
            assert_eq!(letters.len() as u64, full.len(&w));
            let mut acc = d.w1_id();
            for i in letters {
                acc = d.w1_mul(&acc, &full.letters[i].lift);
            }
            acc = d.w1_mul(&acc, &rest);
            assert_eq!(acc, w);
        }
    }

    #[test]
    fn bruhat_w1_reflexive_and_coset() {
        let d = presets::preset("sl2-p3").unwrap();
        let full = d.levi(d.full_delta());
        let ns = d.w1_nv(d.simple_idx(0));
        assert!(full.bruhat_leq_w1(&ns, &ns));
        // n_s·t vs n_s with t outside Z_κ ∩ W_aff(1): for SL2(Q_3) the whole
        // Z_κ is inside, so instead check a plainly incomparable pair
        let lam = d.w1_lambda(Lambda {
            free: vec![1],
            tors: vec![0],
        });
        let id = d.w1_id();
        assert!(full.bruhat_leq_w1(&id, &d.w1_mul(&lam, &d.w1_inv(&lam))));
        assert!(!full.bruhat_leq_w1(&ns, &id));
    }
}
