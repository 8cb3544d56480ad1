//! Graded multi-index layouts shared by every truncated Taylor series.
//!
//! Multi-indices of `nvars` variables up to total degree [`MAX_ORDER`] are
//! listed by increasing total degree, so the entries of a series of order
//! `m` are exactly the first `len(m)` slots of the layout. Product pairs and
//! shift tables are precomputed once per variable count.

use std::collections::HashMap;
use std::sync::OnceLock;

/// Largest supported total derivative order.
pub const MAX_ORDER: usize = 8;

/// Largest supported number of active variables in one series.
pub const MAX_VARS: usize = 8;

pub(crate) const NONE: u32 = u32::MAX;

pub type Exponents = [u8; MAX_VARS];

#[derive(Debug)]
pub struct Layout {
    nvars: usize,
    exps: Vec<Exponents>,
    degree: Vec<u8>,
    /// `degree_end[k]` is the number of entries of total degree `<= k`.
    degree_end: [usize; MAX_ORDER + 1],
    lookup: HashMap<Exponents, u32>,
    /// Pairs `(i, j)` with `e[i] + e[j] = e[out]`, grouped by `out`, `i` ascending.
    pair_start: Vec<u32>,
    pairs: Vec<(u32, u32)>,
    /// `up[v][i]` is the index of `e[i] + unit(v)`, or `NONE` past the maximum order.
    up: Vec<Vec<u32>>,
    factorial: Vec<f64>,
    /// `pure[v][k]` is the index of `k · unit(v)`.
    pure: Vec<[u32; MAX_ORDER + 1]>,
}

impl Layout {
    fn build(nvars: usize) -> Self {
        let mut exps: Vec<Exponents> = Vec::new();
        let mut degree = Vec::new();
        let mut degree_end = [0usize; MAX_ORDER + 1];
        for k in 0..=MAX_ORDER {
            let mut cur = [0u8; MAX_VARS];
            compositions(nvars, k, 0, &mut cur, &mut |e| {
                exps.push(*e);
                degree.push(k as u8);
            });
            degree_end[k] = exps.len();
        }
        let lookup: HashMap<Exponents, u32> =
            exps.iter().enumerate().map(|(i, e)| (*e, i as u32)).collect();

        let mut pair_start = Vec::with_capacity(exps.len() + 1);
        let mut pairs = Vec::new();
        for e in &exps {
            pair_start.push(pairs.len() as u32);
            let mut sub = [0u8; MAX_VARS];
            let mut group: Vec<(u32, u32)> = Vec::new();
            sub_indices(e, nvars, 0, &mut sub, &mut |b| {
                let mut rest = [0u8; MAX_VARS];
                for v in 0..nvars {
                    rest[v] = e[v] - b[v];
                }
                group.push((lookup[b], lookup[&rest]));
            });
            group.sort_unstable();
            pairs.extend(group);
        }
        pair_start.push(pairs.len() as u32);

        let mut up = vec![vec![NONE; exps.len()]; nvars];
        for (i, e) in exps.iter().enumerate() {
            for (v, row) in up.iter_mut().enumerate() {
                let mut f = *e;
                f[v] += 1;
                if let Some(&j) = lookup.get(&f) {
                    row[i] = j;
                }
            }
        }

        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&a| fact(a as usize)).product())
            .collect();

        let pure = (0..nvars)
            .map(|v| {
                let mut row = [0u32; MAX_ORDER + 1];
                for (k, slot) in row.iter_mut().enumerate() {
                    let mut e = [0u8; MAX_VARS];
                    e[v] = k as u8;
                    *slot = lookup[&e];
                }
                row
            })
            .collect();

        Layout { nvars, exps, degree, degree_end, lookup, pair_start, pairs, up, factorial, pure }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of coefficients of a series of total order `order`.
    #[inline]
    pub fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    #[inline]
    pub fn exponents(&self, i: usize) -> &Exponents {
        &self.exps[i]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.degree[i] as usize
    }

    /// Index of a multi-index, if it lies within [`MAX_ORDER`].
    pub fn index_of(&self, e: &Exponents) -> Option<usize> {
        self.lookup.get(e).map(|&i| i as usize)
    }

    /// `α!` for the entry at `i`.
    #[inline]
    pub fn factorial(&self, i: usize) -> f64 {
        self.factorial[i]
    }

    #[inline]
    pub(crate) fn pairs_of(&self, out: usize) -> &[(u32, u32)] {
        &self.pairs[self.pair_start[out] as usize..self.pair_start[out + 1] as usize]
    }

    #[inline]
    pub(crate) fn up(&self, v: usize) -> &[u32] {
        &self.up[v]
    }

    /// Index of `k · unit(v)`.
    #[inline]
    pub fn pure_power(&self, v: usize, k: usize) -> usize {
        self.pure[v][k] as usize
    }
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All exponent vectors of `n` variables with sum `k`, first variable descending.
fn compositions(n: usize, k: usize, v: usize, cur: &mut Exponents, f: &mut impl FnMut(&Exponents)) {
    if n == 0 {
        if k == 0 {
            f(cur);
        }
        return;
    }
    if v == n - 1 {
        cur[v] = k as u8;
        f(cur);
        cur[v] = 0;
        return;
    }
    for a in (0..=k).rev() {
        cur[v] = a as u8;
        compositions(n, k - a, v + 1, cur, f);
    }
    cur[v] = 0;
}

fn sub_indices(e: &Exponents, n: usize, v: usize, cur: &mut Exponents, f: &mut impl FnMut(&Exponents)) {
    if v == n {
        f(cur);
        return;
    }
    for a in 0..=e[v] {
        cur[v] = a;
        sub_indices(e, n, v + 1, cur, f);
    }
    cur[v] = 0;
}

static LAYOUTS: [OnceLock<Layout>; MAX_VARS + 1] = [const { OnceLock::new() }; MAX_VARS + 1];

/// The shared layout for `nvars` variables.
pub fn layout(nvars: usize) -> &'static Layout {
    assert!(nvars <= MAX_VARS, "at most {MAX_VARS} active variables are supported");
    LAYOUTS[nvars].get_or_init(|| Layout::build(nvars))
}

/// Binomial coefficient `C(n, k)` as a count of entries.
pub fn entries(nvars: usize, order: usize) -> usize {
    let mut c = 1usize;
    for i in 0..nvars {
        c = c * (order + nvars - i) / (i + 1);
    }
    c
}
