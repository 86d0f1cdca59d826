//! Two-stage multi-user precoder: co-mode null-space projection E followed by
//! per-user inter-mode inversion G, P = E·G.
//!
//! The construction is generic in the per-user block size D (U for a UCA, 𝔑U for
//! a UCCA).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oam::EffectiveOamChannel;
use crate::{CMat, C64};

/// Condition number above which G_p is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Per-subcarrier precoding matrices.
#[derive(Clone, Debug)]
pub struct PrecodingSet {
    pub users: usize,
    /// Streams per user, D.
    pub block: usize,
    /// E(k_w) = [E_1 … E_P], PD×PD.
    pub e: Vec<CMat>,
    /// G(k_w) = diag(G_1 … G_P), PD×PD.
    pub g: Vec<CMat>,
    /// P(k_w) = E·G.
    pub p: Vec<CMat>,
    /// Condition number of H^p_OAM E_p per subcarrier and user.
    pub condition: Vec<Vec<f64>>,
}

impl PrecodingSet {
    /// P_p(k_w), PD×D.
    pub fn user_columns(&self, w: usize, p: usize) -> CMat {
        self.p[w].columns(p * self.block, self.block).into_owned()
    }

    /// All-identity precoder (no preprocessing).
    pub fn identity(users: usize, block: usize, subcarriers: usize) -> Self {
        let n = users * block;
        let eye = CMat::identity(n, n);
        Self {
            users,
            block,
            e: vec![eye.clone(); subcarriers],
            g: vec![eye.clone(); subcarriers],
            p: vec![eye; subcarriers],
            condition: vec![vec![1.0; users]; subcarriers],
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.p.len()
    }
}

/// Rows of every user except `p`, ascending.
pub fn stack_other_users(h: &CMat, p: usize, block: usize) -> Result<CMat> {
    let users = h.nrows() / block;
    if users < 2 {
        return Err(Error::InvalidParameter("stacking other users needs P >= 2".into()));
    }
    if p >= users {
        return Err(Error::InvalidParameter(format!("user {p} out of range")));
    }
    let mut out = CMat::zeros((users - 1) * block, h.ncols());
    let mut r = 0;
    for q in (0..users).filter(|&q| q != p) {
        out.rows_mut(r, block).copy_from(&h.rows(q * block, block));
        r += block;
    }
    Ok(out)
}

/// Right singular vectors of `hhat` paired with its `d` smallest singular values.
pub fn comode_null_basis(hhat: &CMat, d: usize) -> Result<CMat> {
    let n = hhat.ncols();
    if d > n {
        return Err(Error::DimensionMismatch(format!("null space of size {d} requested from {n} columns")));
    }
    if hhat.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Ok(CMat::identity(n, n).columns(n - d, d).into_owned());
    }
    let mut sq = CMat::zeros(n.max(hhat.nrows()), n);
    sq.rows_mut(0, hhat.nrows()).copy_from(hhat);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.ok_or(Error::SvdFailed)?;
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    // Descending; the last d are the null-space directions.
    order.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut e = CMat::zeros(n, d);
    for (j, &idx) in order[order.len() - d..].iter().enumerate() {
        for i in 0..n {
            e[(i, j)] = vt[(idx, i)].conj();
        }
    }
    Ok(e)
}

/// Spectral condition number of a square matrix.
pub fn condition_number(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// G_p = (H^p_OAM E_p)^{-1} with its condition number.
pub fn intermode_inverse(hp: &CMat, ep: &CMat, user: usize) -> Result<(CMat, f64)> {
    let a = hp * ep;
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch("H^p E_p must be square".into()));
    }
    let cond = condition_number(&a);
    if !(cond <= MAX_CONDITION) {
        return Err(Error::IllConditioned { user, cond });
    }
    let inv = a.lu().try_inverse().ok_or(Error::IllConditioned { user, cond })?;
    Ok((inv, cond))
}

fn precoder_at(h: &CMat, users: usize, block: usize) -> Result<(CMat, CMat, Vec<f64>)> {
    let n = users * block;
    if h.nrows() != n || h.ncols() != n {
        return Err(Error::DimensionMismatch(format!("effective channel is {:?}, expected {n}x{n}", h.shape())));
    }
    let mut e = CMat::zeros(n, n);
    let mut g = CMat::zeros(n, n);
    let mut cond = Vec::with_capacity(users);
    for p in 0..users {
        let ep = if users == 1 { CMat::identity(n, n) } else { comode_null_basis(&stack_other_users(h, p, block)?, block)? };
        let hp = h.rows(p * block, block).into_owned();
        let (gp, c) = intermode_inverse(&hp, &ep, p)?;
        e.columns_mut(p * block, block).copy_from(&ep);
        g.view_mut((p * block, p * block), (block, block)).copy_from(&gp);
        cond.push(c);
    }
    Ok((e, g, cond))
}

/// Build E, G and P for every subcarrier of an effective channel.
pub fn build_precoder(h: &EffectiveOamChannel) -> Result<PrecodingSet> {
    let parts: Vec<Result<(CMat, CMat, Vec<f64>)>> =
        h.matrices.par_iter().map(|m| precoder_at(m, h.users, h.block)).collect();
    let mut set = PrecodingSet { users: h.users, block: h.block, e: vec![], g: vec![], p: vec![], condition: vec![] };
    for part in parts {
        let (e, g, c) = part?;
        set.p.push(&e * &g);
        set.e.push(e);
        set.g.push(g);
        set.condition.push(c);
    }
    Ok(set)
}

/// Residual norms of H_OAM·P against block identity at one subcarrier.
#[derive(Clone, Debug, PartialEq)]
pub struct DecouplingResidual {
    /// ‖H^p_OAM P_p − I‖_F per user.
    pub inter_mode: Vec<f64>,
    /// ‖H^p_OAM P_q‖_F, indexed [p][q]; zero on the diagonal.
    pub co_mode: Vec<Vec<f64>>,
    /// ‖H_OAM P − I‖_F / ‖I‖_F.
    pub normalized_total: f64,
}

/// Decoupling residuals for every subcarrier.
pub fn verify_decoupling(h: &EffectiveOamChannel, set: &PrecodingSet) -> Vec<DecouplingResidual> {
    h.matrices
        .par_iter()
        .zip(set.p.par_iter())
        .map(|(hm, pm)| decoupling_at(hm, pm, set.users, set.block))
        .collect()
}

/// Residuals of one subcarrier.
pub fn decoupling_at(h: &CMat, p: &CMat, users: usize, block: usize) -> DecouplingResidual {
    let a = h * p;
    let n = users * block;
    let mut inter = vec![0.0; users];
    let mut co = vec![vec![0.0; users]; users];
    let mut total = 0.0;
    for pi in 0..users {
        for qi in 0..users {
            let blk = a.view((pi * block, qi * block), (block, block));
            if pi == qi {
                let mut s = 0.0;
                for r in 0..block {
                    for c in 0..block {
                        let want = if r == c { 1.0 } else { 0.0 };
                        s += (blk[(r, c)] - C64::new(want, 0.0)).norm_sqr();
                    }
                }
                inter[pi] = s.sqrt();
                total += s;
            } else {
                let s = blk.norm_squared();
                co[pi][qi] = s.sqrt();
                total += s;
            }
        }
    }
    DecouplingResidual { inter_mode: inter, co_mode: co, normalized_total: (total / n as f64).sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_inverse() {
        let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 4.0)]));
        let (g, c) = intermode_inverse(&d, &CMat::identity(2, 2), 0).unwrap();
        assert!((g[(0, 0)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((g[(1, 1)] - C64::new(0.0, -0.25)).norm() < 1e-15);
        assert!((c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_rejected() {
        let a = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(2.0, 0.0), C64::new(4.0, 0.0)]);
        assert!(matches!(intermode_inverse(&a, &CMat::identity(2, 2), 3), Err(Error::IllConditioned { user: 3, .. })));
    }

    #[test]
    fn zero_stack_gives_canonical_basis() {
        let e = comode_null_basis(&CMat::zeros(2, 4), 2).unwrap();
        assert_eq!(e, CMat::identity(4, 4).columns(2, 2).into_owned());
    }

    #[test]
    fn stacking_two_users() {
        let h = CMat::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
        let s = stack_other_users(&h, 0, 2).unwrap();
        assert_eq!(s, h.rows(2, 2).into_owned());
        assert!(stack_other_users(&CMat::zeros(2, 2), 0, 2).is_err());
    }

    #[test]
    fn zero_precoder_residual() {
        let h = CMat::identity(6, 6);
        let r = decoupling_at(&h, &CMat::zeros(6, 6), 2, 3);
        for v in r.inter_mode {
            assert!((v - 3f64.sqrt()).abs() < 1e-15);
        }
    }
}
