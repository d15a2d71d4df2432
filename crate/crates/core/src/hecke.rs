//! The Hecke algebra of a (Levi) datum: `T`-basis multiplication, the bases
//! `T*`, `E_o` (alcove walk) and `E_-`, the involution `ι`, and central
//! elements `z_O`.
//!
//! All structure constants are computed once over `ℤ[q]` in [`GenTables`]
//! and specialized to the working ring by evaluating at the image of `q`.
//! This matters for `E_-`: its definition divides `T*_{n_v} E_{o_-}(λ)` by
//! an exact power of `q`, which is only possible before specialization.

use crate::ring::{Ring, ZPoly, ZPolyRing};
use crate::roots::W0Idx;
use crate::weyl::{DeltaSet, Letter, LeviCtx, W1Elt};
use crate::{Error, Result};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Element of the generic algebra over `ℤ[q]`, in the `T`-basis.
pub type GenElt = BTreeMap<W1Elt, ZPoly>;

fn gen_add_term(acc: &mut GenElt, k: W1Elt, c: ZPoly) {
    let zr = ZPolyRing;
    let entry = acc.entry(k).or_insert_with(|| zr.zero());
    *entry = zr.add(entry, &c);
    if entry.is_zero() {
        // keep maps free of zeros
        // (entry borrow ends before removal)
    }
}

fn gen_normalize(acc: &mut GenElt) {
    acc.retain(|_, c| !c.is_zero());
}

/// Memoized structure constants over `ℤ[q]` for one Levi context.
pub struct GenTables {
    pub ctx: Arc<LeviCtx>,
    /// Auto-calibrated convention bit for affine crossings.
    pub aff_bit: bool,
    one_letter: Mutex<HashMap<(W1Elt, usize), GenElt>>,
    tstar: Mutex<HashMap<W1Elt, GenElt>>,
    eo: Mutex<HashMap<(W0Idx, W1Elt), GenElt>>,
    eminus: Mutex<HashMap<W1Elt, GenElt>>,
}

static TABLES: OnceLock<Mutex<Vec<(usize, DeltaSet, Arc<GenTables>)>>> = OnceLock::new();

impl GenTables {
    /// Tables for a Levi context, calibrated on first construction.
    pub fn for_ctx(ctx: &Arc<LeviCtx>) -> Result<Arc<GenTables>> {
        let key = Arc::as_ptr(&ctx.datum) as usize;
        let reg = TABLES.get_or_init(|| Mutex::new(Vec::new()));
        {
            let g = reg.lock().unwrap();
            if let Some((_, _, t)) = g.iter().find(|(k, d, _)| *k == key && *d == ctx.delta) {
                return Ok(t.clone());
            }
        }
        let t = Arc::new(GenTables::calibrate(ctx)?);
        reg.lock().unwrap().push((key, ctx.delta, t.clone()));
        Ok(t)
    }

    fn calibrate(ctx: &Arc<LeviCtx>) -> Result<GenTables> {
        for bit in [false, true] {
            let cand = GenTables {
                ctx: ctx.clone(),
                aff_bit: bit,
                one_letter: Mutex::new(HashMap::new()),
                tstar: Mutex::new(HashMap::new()),
                eo: Mutex::new(HashMap::new()),
                eminus: Mutex::new(HashMap::new()),
            };
            if cand.calibration_passes() {
                return Ok(cand);
            }
        }
        Err(Error::Params(
            "orientation convention calibration failed: no crossing convention reproduces the \
             dominant/anti-dominant translation values"
                .into(),
        ))
    }

    /// The pinned translation values: for each component's highest-coroot
    /// translation `λ_θ` (dominant), `E_{o_-}(λ_θ) = T*_{λ_θ}` and
    /// `E_{o_-}(λ_θ^{-1}) = T_{λ_θ^{-1}}`, with the mirrored values for `o_+`.
    fn calibration_passes(&self) -> bool {
        let ctx = &self.ctx;
        let d = &ctx.datum;
        let o_minus: W0Idx = 0;
        let o_plus: W0Idx = ctx.w_longest;
        for l in &ctx.letters {
            let crate::weyl::LetterKind::Aff(_) = l.kind else {
                continue;
            };
            let lam = d.w1_mul(&l.lift, &d.w1_inv(&d.w1_nv(l.w0img)));
            let lam_inv = d.w1_inv(&lam);
            let checks = [
                (o_minus, lam.clone(), self.tstar(&lam)),
                (o_minus, lam_inv.clone(), single(lam_inv.clone())),
                (o_plus, lam.clone(), single(lam.clone())),
                (o_plus, lam_inv.clone(), self.tstar(&lam_inv)),
            ];
            for (o, w, expect) in checks {
                if self.e_o(o, &w) != expect {
                    return false;
                }
            }
        }
        true
    }

    // -- products --------------------------------------------------------------

    /// `T_w · T_{s̃}` for the letter with index `li`.
    pub fn one_letter(&self, w: &W1Elt, li: usize) -> GenElt {
        if let Some(e) = self.one_letter.lock().unwrap().get(&(w.clone(), li)) {
            return e.clone();
        }
        let ctx = &self.ctx;
        let d = &ctx.datum;
        let l = &ctx.letters[li];
        let ws = d.w1_mul(w, &l.lift);
        let out = if ctx.len(&ws) > ctx.len(w) {
            single(ws)
        } else {
            // T_w T_s = q T_{ws} + Σ_t c_{s^{-1}}(t) T_{(ws)·t·s}
            let zr = ZPolyRing;
            let mut acc: GenElt = BTreeMap::new();
            gen_add_term(&mut acc, ws.clone(), ZPoly::q_power(1));
            for (t, m) in &l.c_inv {
                let telt = d.w1_lambda(crate::weyl::Lambda {
                    free: vec![0; d.rs.rank_lattice],
                    tors: t.clone(),
                });
                let key = d.w1_mul(&d.w1_mul(&ws, &telt), &l.lift);
                gen_add_term(&mut acc, key, zr.from_i64(*m));
            }
            gen_normalize(&mut acc);
            acc
        };
        self.one_letter
            .lock()
            .unwrap()
            .insert((w.clone(), li), out.clone());
        out
    }

    /// Product of two generic elements in the `T`-basis.
    pub fn mul(&self, a: &GenElt, b: &GenElt) -> GenElt {
        let zr = ZPolyRing;
        let mut out: GenElt = BTreeMap::new();
        for (y, cy) in b {
            let (letters, rest) = self.ctx.reduced_letters(y);
            for (x, cx) in a {
                let mut acc = single(x.clone());
                for &li in &letters {
                    let mut next: GenElt = BTreeMap::new();
                    for (k, c) in &acc {
                        for (k2, c2) in self.one_letter(k, li) {
                            gen_add_term(&mut next, k2, zr.mul(c, &c2));
                        }
                    }
                    gen_normalize(&mut next);
                    acc = next;
                }
                let coeff = zr.mul(cx, cy);
                for (k, c) in acc {
                    let key = self.ctx.datum.w1_mul(&k, &rest);
                    gen_add_term(&mut out, key, zr.mul(&c, &coeff));
                }
            }
        }
        gen_normalize(&mut out);
        out
    }

    /// `T*_w = (T_{s̃₁} − c_{s̃₁}) ⋯ (T_{s̃_l} − c_{s̃_l}) T_u`.
    pub fn tstar(&self, w: &W1Elt) -> GenElt {
        if let Some(e) = self.tstar.lock().unwrap().get(w) {
            return e.clone();
        }
        let ctx = &self.ctx;
        let d = &ctx.datum;
        let (letters, rest) = ctx.reduced_letters(w);
        let mut acc = single(d.w1_id());
        for &li in &letters {
            let factor = tstar_factor(ctx, &ctx.letters[li]);
            acc = self.mul(&acc, &factor);
        }
        let mut out: GenElt = BTreeMap::new();
        for (k, c) in acc {
            out.insert(d.w1_mul(&k, &rest), c);
        }
        self.tstar.lock().unwrap().insert(w.clone(), out.clone());
        out
    }

    /// Whether the crossing of the letter is in the direction of the chamber
    /// of the orientation `o_{-,M} · v`; such crossings contribute `T`.
    fn crossing_positive(&self, v: W0Idx, l: &Letter) -> bool {
        let d = &self.ctx.datum;
        let img = d.w0.apply_root(v, l.grad);
        let pos = d.rs.roots[img].positive;
        match l.kind {
            crate::weyl::LetterKind::Fin(_) => pos,
            crate::weyl::LetterKind::Aff(_) => !pos ^ self.aff_bit,
        }
    }

    /// Alcove-walk basis `E_{o_{-,M}·v}(w)`, by peeling left descents with
    /// the crossing convention; the orientation moves by the walked letter.
    pub fn e_o(&self, v: W0Idx, w: &W1Elt) -> GenElt {
        if let Some(e) = self.eo.lock().unwrap().get(&(v, w.clone())) {
            return e.clone();
        }
        let ctx = &self.ctx;
        let d = &ctx.datum;
        let out = match ctx.left_descent(w) {
            None => single(w.clone()),
            Some(li) => {
                let l = &ctx.letters[li];
                let base = if self.crossing_positive(v, l) {
                    single(l.lift.clone())
                } else {
                    tstar_factor(ctx, l)
                };
                let v2 = d.w0.mul(v, l.w0img);
                let rest = self.e_o(v2, &d.w1_mul(&l.lift_inv, w));
                self.mul(&base, &rest)
            }
        };
        self.eo.lock().unwrap().insert((v, w.clone()), out.clone());
        out
    }

    /// `E_-(n_v λ)`: the exact `q`-power division of `T*_{n_v} E_{o_-}(λ)`.
    pub fn e_minus(&self, w: &W1Elt) -> GenElt {
        if let Some(e) = self.eminus.lock().unwrap().get(w) {
            return e.clone();
        }
        let ctx = &self.ctx;
        let d = &ctx.datum;
        let nv = d.w1_nv(w.v);
        let lam = d.w1_lambda(w.lam.clone());
        let prod = self.mul(&self.tstar(&nv), &self.e_o(0, &lam));
        let e = ctx.len(&nv) + ctx.len(&lam) - ctx.len(w);
        assert!(e % 2 == 0, "odd length defect in E_- (length bug)");
        let e = e / 2;
        let mut out: GenElt = BTreeMap::new();
        for (k, c) in prod {
            out.insert(k, c.div_q_power(e));
        }
        self.eminus.lock().unwrap().insert(w.clone(), out.clone());
        out
    }
}

fn single(w: W1Elt) -> GenElt {
    let mut m = BTreeMap::new();
    m.insert(w, ZPolyRing.one());
    m
}

/// `T_{s̃} − c_{s̃}` as a generic element.
fn tstar_factor(ctx: &LeviCtx, l: &Letter) -> GenElt {
    let zr = ZPolyRing;
    let d = &ctx.datum;
    let mut f: GenElt = BTreeMap::new();
    gen_add_term(&mut f, l.lift.clone(), zr.one());
    for (t, m) in &l.c {
        let telt = d.w1_lambda(crate::weyl::Lambda {
            free: vec![0; d.rs.rank_lattice],
            tors: t.clone(),
        });
        gen_add_term(&mut f, telt, zr.from_i64(-m));
    }
    gen_normalize(&mut f);
    f
}

// ---------------------------------------------------------------------------
// Specialized algebra

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BasisTag {
    T,
    TStar,
    /// `E_{o_{-,M}·v}`; `v = 0` is the anti-dominant orientation, the
    /// longest element gives the dominant one.
    EO(W0Idx),
    EMinus,
}

/// Algebra element over the working ring, a finitely supported coefficient
/// map tagged with the basis its keys refer to.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Elt<R: Ring> {
    pub levi: DeltaSet,
    pub tag: BasisTag,
    pub coeffs: BTreeMap<W1Elt, R::Elem>,
}

/// The Hecke algebra of one Levi context over a concrete coefficient ring.
#[derive(Clone)]
pub struct Algebra<R: Ring> {
    pub tables: Arc<GenTables>,
    pub ring: R,
    pub q: R::Elem,
}

impl<R: Ring> Algebra<R> {
    /// Build the algebra handle; `q_image` must be the image of the datum's
    /// `q` in the ring, otherwise the pair is inconsistent.
    pub fn new(ctx: &Arc<LeviCtx>, ring: R, q_image: R::Elem) -> Result<Algebra<R>> {
        let expected = ring.from_i64(ctx.datum.q as i64);
        if q_image != expected {
            return Err(Error::Params(format!(
                "q must map to the image of {} in {}",
                ctx.datum.q,
                ring.name()
            )));
        }
        let tables = GenTables::for_ctx(ctx)?;
        Ok(Algebra {
            tables,
            ring,
            q: q_image,
        })
    }

    pub fn ctx(&self) -> &Arc<LeviCtx> {
        &self.tables.ctx
    }
    pub fn delta(&self) -> DeltaSet {
        self.ctx().delta
    }

    /// Restrict to the Levi `Δ_P ⊆ Δ_M` over the same ring.
    pub fn levi(&self, p: DeltaSet) -> Result<Algebra<R>> {
        let ctx = self.ctx().datum.levi(p);
        Algebra::new(&ctx, self.ring.clone(), self.q.clone())
    }

    pub fn specialize(&self, g: &GenElt) -> Elt<R> {
        let mut coeffs = BTreeMap::new();
        for (k, c) in g {
            let v = c.eval(&self.ring, &self.q);
            if !self.ring.is_zero(&v) {
                coeffs.insert(k.clone(), v);
            }
        }
        Elt {
            levi: self.delta(),
            tag: BasisTag::T,
            coeffs,
        }
    }

    pub fn zero(&self) -> Elt<R> {
        Elt {
            levi: self.delta(),
            tag: BasisTag::T,
            coeffs: BTreeMap::new(),
        }
    }
    pub fn unit(&self) -> Elt<R> {
        self.basis_t(&self.ctx().datum.w1_id())
    }
    pub fn basis_t(&self, w: &W1Elt) -> Elt<R> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(w.clone(), self.ring.one());
        Elt {
            levi: self.delta(),
            tag: BasisTag::T,
            coeffs,
        }
    }
    pub fn basis_in(&self, tag: BasisTag, w: &W1Elt) -> Elt<R> {
        let mut e = self.basis_t(w);
        e.tag = tag;
        e
    }

    fn check(&self, x: &Elt<R>) {
        assert_eq!(
            x.levi,
            self.delta(),
            "element belongs to a different (Levi) algebra"
        );
    }

    pub fn add(&self, a: &Elt<R>, b: &Elt<R>) -> Elt<R> {
        self.check(a);
        self.check(b);
        assert_eq!(a.tag, b.tag, "cannot add across bases; convert first");
        let mut coeffs = a.coeffs.clone();
        for (k, c) in &b.coeffs {
            let e = coeffs.entry(k.clone()).or_insert_with(|| self.ring.zero());
            *e = self.ring.add(e, c);
        }
        coeffs.retain(|_, c| !self.ring.is_zero(c));
        Elt {
            levi: a.levi,
            tag: a.tag,
            coeffs,
        }
    }

    pub fn scale(&self, a: &Elt<R>, c: &R::Elem) -> Elt<R> {
        let mut coeffs = BTreeMap::new();
        for (k, x) in &a.coeffs {
            let v = self.ring.mul(x, c);
            if !self.ring.is_zero(&v) {
                coeffs.insert(k.clone(), v);
            }
        }
        Elt {
            levi: a.levi,
            tag: a.tag,
            coeffs,
        }
    }

    pub fn neg(&self, a: &Elt<R>) -> Elt<R> {
        self.scale(a, &self.ring.from_i64(-1))
    }

    pub fn sub(&self, a: &Elt<R>, b: &Elt<R>) -> Elt<R> {
        self.add(a, &self.neg(b))
    }

    /// Product in the `T`-basis (inputs converted as needed).
    pub fn mul(&self, a: &Elt<R>, b: &Elt<R>) -> Elt<R> {
        self.check(a);
        self.check(b);
        let a = self.to_t(a);
        let b = self.to_t(b);
        let mut out = self.zero();
        for (x, cx) in &a.coeffs {
            for (y, cy) in &b.coeffs {
                let g = self.tables.mul(&single(x.clone()), &single(y.clone()));
                let term = self.scale(&self.specialize(&g), &self.ring.mul(cx, cy));
                out = self.add(&out, &term);
            }
        }
        out
    }

    pub fn pow(&self, a: &Elt<R>, n: u64) -> Elt<R> {
        let mut acc = self.unit();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Expansion of the tagged basis element at `w` in the `T`-basis.
    pub fn basis_expansion(&self, tag: BasisTag, w: &W1Elt) -> Elt<R> {
        match tag {
            BasisTag::T => self.basis_t(w),
            BasisTag::TStar => self.specialize(&self.tables.tstar(w)),
            BasisTag::EO(v) => self.specialize(&self.tables.e_o(v, w)),
            BasisTag::EMinus => self.specialize(&self.tables.e_minus(w)),
        }
    }

    /// Convert to the `T`-basis.
    pub fn to_t(&self, x: &Elt<R>) -> Elt<R> {
        if x.tag == BasisTag::T {
            return x.clone();
        }
        let mut out = self.zero();
        for (w, c) in &x.coeffs {
            out = self.add(&out, &self.scale(&self.basis_expansion(x.tag, w), c));
        }
        out
    }

    /// Convert to the target basis by triangular extraction: the expansions
    /// are unitriangular with respect to the Bruhat order, so repeatedly
    /// stripping a maximal-length key terminates.
    pub fn to_basis(&self, x: &Elt<R>, tag: BasisTag) -> Elt<R> {
        let mut rem = self.to_t(x);
        let mut coeffs: BTreeMap<W1Elt, R::Elem> = BTreeMap::new();
        while let Some((w, c)) = rem
            .coeffs
            .iter()
            .max_by_key(|(w, _)| (self.ctx().len(w), (*w).clone()))
            .map(|(w, c)| (w.clone(), c.clone()))
        {
            let e = coeffs.entry(w.clone()).or_insert_with(|| self.ring.zero());
            *e = self.ring.add(e, &c);
            let expansion = self.basis_expansion(tag, &w);
            rem = self.sub(&rem, &self.scale(&expansion, &c));
        }
        coeffs.retain(|_, c| !self.ring.is_zero(c));
        Elt {
            levi: x.levi,
            tag,
            coeffs,
        }
    }

    /// `T*_w` as a `T`-basis element.
    pub fn tstar_elt(&self, w: &W1Elt) -> Elt<R> {
        self.basis_expansion(BasisTag::TStar, w)
    }
    /// `E_{o_{-,M}·v}(w)` as a `T`-basis element.
    pub fn e_o_elt(&self, v: W0Idx, w: &W1Elt) -> Elt<R> {
        self.basis_expansion(BasisTag::EO(v), w)
    }
    /// `E_-(w)` as a `T`-basis element.
    pub fn e_minus_elt(&self, w: &W1Elt) -> Elt<R> {
        self.basis_expansion(BasisTag::EMinus, w)
    }

    /// The involution `ι`: linear with `T_w ↦ (−1)^{ℓ(w)} T*_w`.
    pub fn iota(&self, x: &Elt<R>) -> Elt<R> {
        let x = self.to_t(x);
        let mut out = self.zero();
        for (w, c) in &x.coeffs {
            let sign = if self.ctx().len(w) % 2 == 0 { 1 } else { -1 };
            let t = self.scale(&self.tstar_elt(w), &self.ring.mul(c, &self.ring.from_i64(sign)));
            out = self.add(&out, &t);
        }
        out
    }

    /// The `W(1)`-conjugacy class of `λ ∈ Λ(1)`.
    pub fn conj_class(&self, lam: &W1Elt) -> Vec<W1Elt> {
        assert!(lam.is_lambda(), "z_O needs a Λ(1) element");
        let d = &self.ctx().datum;
        let mut out: Vec<W1Elt> = Vec::new();
        for &w in &self.ctx().w0m {
            let c = d.w1_lambda(d.conj_lambda(w, &lam.lam));
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out.sort();
        out
    }

    /// `z_O = Σ_{μ ∈ O} E_o(μ)` for the class of `λ`, computed with the
    /// orientation `o_{-,M}·v`.
    pub fn z_class_with(&self, v: W0Idx, lam: &W1Elt) -> Elt<R> {
        let mut out = self.zero();
        for mu in self.conj_class(lam) {
            out = self.add(&out, &self.e_o_elt(v, &mu));
        }
        out
    }

    /// `z_O` with the anti-dominant orientation.
    pub fn z_class(&self, lam: &W1Elt) -> Elt<R> {
        self.z_class_with(0, lam)
    }

    pub fn q_pow(&self, e: u64) -> R::Elem {
        self.ring.pow(&self.q, e)
    }

    // -- canonical textual format ---------------------------------------------

    pub fn fmt_elt(&self, x: &Elt<R>) -> String {
        let x = self.to_t(x);
        if x.coeffs.is_empty() {
            return "0".into();
        }
        let d = &self.ctx().datum;
        x.coeffs
            .iter()
            .map(|(w, c)| {
                let vword = if d.w0.word(w.v).is_empty() {
                    "e".to_string()
                } else {
                    d.w0
                        .word(w.v)
                        .iter()
                        .map(|s| format!("s{s}"))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let free = w
                    .lam
                    .free
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                let tors = w
                    .lam
                    .tors
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                format!("{} * [{vword};{free};{tors}]", self.ring.fmt_elem(c))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn parse_elt(&self, s: &str) -> Result<Elt<R>> {
        let s = s.trim();
        if s == "0" {
            return Ok(self.zero());
        }
        let d = &self.ctx().datum;
        let mut out = self.zero();
        for term in s.split(" + ") {
            let (coeff, key) = term
                .split_once('*')
                .ok_or_else(|| Error::Parse(format!("missing `*` in term {term:?}")))?;
            let c = self
                .ring
                .parse_elem(coeff.trim())
                .map_err(Error::Parse)?;
            let key = key.trim();
            if !(key.starts_with('[') && key.ends_with(']')) {
                return Err(Error::Parse(format!("bad key {key:?}")));
            }
            let inner = &key[1..key.len() - 1];
            let parts: Vec<&str> = inner.split(';').collect();
            if parts.len() != 3 {
                return Err(Error::Parse(format!("key needs 3 parts: {key:?}")));
            }
            let v = if parts[0].trim() == "e" {
                0
            } else {
                let mut v: W0Idx = 0;
                for tok in parts[0].split_whitespace() {
                    let idx: usize = tok
                        .strip_prefix('s')
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::Parse(format!("bad letter {tok:?}")))?;
                    if idx >= d.rs.num_simple() {
                        return Err(Error::Parse(format!("letter out of range: {tok}")));
                    }
                    v = d.w0.mul(v, d.simple_idx(idx));
                }
                v
            };
            let parse_ints = |s: &str| -> Result<Vec<i64>> {
                if s.trim().is_empty() {
                    return Ok(vec![]);
                }
                s.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|e| Error::Parse(format!("bad integer {t:?}: {e}")))
                    })
                    .collect()
            };
            let free = parse_ints(parts[1])?;
            let tors_i = parse_ints(parts[2])?;
            if free.len() != d.rs.rank_lattice || tors_i.len() != d.zk_orders.len() {
                return Err(Error::Parse(format!(
                    "key dimensions do not match the datum: {key:?}"
                )));
            }
            let tors: Vec<u32> = tors_i
                .iter()
                .zip(&d.zk_orders)
                .map(|(&x, &o)| (x.rem_euclid(o as i64)) as u32)
                .collect();
            let w = W1Elt {
                v,
                lam: crate::weyl::Lambda { free, tors },
            };
            out = self.add(&out, &self.scale(&self.basis_t(&w), &c));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets;
    use crate::ring::{FpK, RatField};

    fn sl2p3_q() -> (Arc<crate::weyl::Datum>, Algebra<RatField>) {
        let d = presets::preset("sl2-p3").unwrap();
        let ctx = d.levi(d.full_delta());
        let a = Algebra::new(&ctx, RatField, RatField.from_i64(3)).unwrap();
        (d, a)
    }

    #[test]
    fn quadratic_relation() {
        let (d, a) = sl2p3_q();
        let ns = d.w1_nv(d.simple_idx(0));
        let ts = a.basis_t(&ns);
        let sq = a.mul(&ts, &ts);
        // q T_{s²} + c_s T_s
        let mut expect = a.scale(&a.basis_t(&d.w1_mul(&ns, &ns)), &a.q);
        for t in 0..2u32 {
            let telt = d.w1_lambda(crate::weyl::Lambda {
                free: vec![0],
                tors: vec![t],
            });
            expect = a.add(&expect, &a.basis_t(&d.w1_mul(&telt, &ns)));
        }
        assert_eq!(sq, expect);
    }

    #[test]
    fn inconsistent_q_rejected() {
        let d = presets::preset("sl2-p3").unwrap();
        let ctx = d.levi(d.full_delta());
        let f3 = FpK::new(3, 1).unwrap();
        // q ↦ 0 is the image of 3 in F_3: fine
        assert!(Algebra::new(&ctx, f3.clone(), f3.from_i64(3)).is_ok());
        // q ↦ 2 is not the image of 3
        assert!(Algebra::new(&ctx, f3.clone(), f3.from_i64(2)).is_err());
    }

    #[test]
    fn tstar_of_letter() {
        let (d, a) = sl2p3_q();
        let ns = d.w1_nv(d.simple_idx(0));
        // T*_s = T_s − c_s
        let star = a.tstar_elt(&ns);
        let mut expect = a.basis_t(&ns);
        for t in 0..2u32 {
            let telt = d.w1_lambda(crate::weyl::Lambda {
                free: vec![0],
                tors: vec![t],
            });
            expect = a.sub(&expect, &a.basis_t(&telt));
        }
        assert_eq!(star, expect);
        // and T*_t = T_t for torsion
        let t1 = d.w1_lambda(crate::weyl::Lambda {
            free: vec![0],
            tors: vec![1],
        });
        assert_eq!(a.tstar_elt(&t1), a.basis_t(&t1));
    }

    #[test]
    fn to_basis_round_trip() {
        let (d, a) = sl2p3_q();
        let ns = d.w1_nv(d.simple_idx(0));
        let lam = d.w1_lambda(crate::weyl::Lambda {
            free: vec![1],
            tors: vec![1],
        });
        let x = a.add(&a.basis_t(&ns), &a.scale(&a.basis_t(&lam), &a.ring.from_i64(5)));
        for tag in [BasisTag::TStar, BasisTag::EMinus, BasisTag::EO(0)] {
            let y = a.to_basis(&x, tag);
            assert_eq!(a.to_t(&y), x, "round trip through {tag:?}");
        }
    }

    #[test]
    fn iota_involutive() {
        let (d, a) = sl2p3_q();
        let ns = d.w1_nv(d.simple_idx(0));
        let x = a.add(&a.basis_t(&ns), &a.unit());
        assert_eq!(a.iota(&a.iota(&x)), x);
        // ι(T_s) = −T_s + c_s = −T*_s
        let it = a.iota(&a.basis_t(&ns));
        assert_eq!(it, a.neg(&a.tstar_elt(&ns)));
    }

    #[test]
    fn format_round_trip() {
        let (d, a) = sl2p3_q();
        let ns = d.w1_nv(d.simple_idx(0));
        let lam = d.w1_lambda(crate::weyl::Lambda {
            free: vec![-2],
            tors: vec![1],
        });
        let x = a.add(&a.basis_t(&d.w1_mul(&ns, &lam)), &a.scale(&a.unit(), &a.ring.from_i64(7)));
        let s = a.fmt_elt(&x);
        let y = a.parse_elt(&s).unwrap();
        assert_eq!(x, y);
    }
}
