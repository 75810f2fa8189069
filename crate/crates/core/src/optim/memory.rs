//! Windowed storage of quasi-Newton pairs with cached inner products.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::tensor::Matrix;
use crate::vector::dot;

/// Which difference vectors pair with the stored steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKind {
    /// Gradient differences `y`.
    Gradient,
    /// Preconditioned gradient differences `ȳ`.
    Preconditioned,
}

/// Cross inner products `a_iᵀ b_j` of two windows, kept in sync with pushes
/// and evictions.
#[derive(Debug, Clone, Default)]
struct Cross {
    rows: VecDeque<VecDeque<f64>>,
}

impl Cross {
    fn push(&mut self, a: &VecDeque<Vec<f64>>, b: &VecDeque<Vec<f64>>) {
        let last = a.len() - 1;
        for (i, row) in self.rows.iter_mut().enumerate() {
            row.push_back(dot(&a[i], &b[last]));
        }
        self.rows.push_back((0..b.len()).map(|j| dot(&a[last], &b[j])).collect());
    }

    fn evict(&mut self) {
        self.rows.pop_front();
        for r in self.rows.iter_mut() {
            r.pop_front();
        }
    }

    fn rebuild(a: &VecDeque<Vec<f64>>, b: &VecDeque<Vec<f64>>) -> Self {
        let rows = a.iter().map(|ai| b.iter().map(|bj| dot(ai, bj)).collect()).collect();
        Self { rows }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }
}

/// FIFO window of at most `m` pairs `(s, y, ȳ)` plus the gradient at the
/// start of each step.
#[derive(Debug, Clone)]
pub struct QnMemory {
    capacity: usize,
    track_bar: bool,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    ybar: VecDeque<Vec<f64>>,
    g: VecDeque<Vec<f64>>,
    sty: Cross,
    sts: Cross,
    yty: Cross,
    gts: Cross,
    stybar: Cross,
    ybty: Cross,
    ytybar: Cross,
}

impl QnMemory {
    /// `track_bar` enables storage of `ȳ` and its caches.
    pub fn new(capacity: usize, track_bar: bool) -> Self {
        Self {
            capacity,
            track_bar,
            s: VecDeque::new(),
            y: VecDeque::new(),
            ybar: VecDeque::new(),
            g: VecDeque::new(),
            sty: Cross::default(),
            sts: Cross::default(),
            yty: Cross::default(),
            gts: Cross::default(),
            stybar: Cross::default(),
            ybty: Cross::default(),
            ytybar: Cross::default(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn tracks_bar(&self) -> bool {
        self.track_bar
    }

    pub fn clear(&mut self) {
        *self = Self::new(self.capacity, self.track_bar);
    }

    /// Appends a pair, evicting the oldest when full. `ybar` is required
    /// when the memory tracks preconditioned differences; `g_start` is the
    /// gradient at the start of the step.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>, ybar: Option<Vec<f64>>, g_start: Vec<f64>) {
        if self.capacity == 0 {
            return;
        }
        if self.s.len() == self.capacity {
            self.evict();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        self.g.push_back(g_start);
        self.sty.push(&self.s, &self.y);
        self.sts.push(&self.s, &self.s);
        self.yty.push(&self.y, &self.y);
        self.gts.push(&self.g, &self.s);
        if self.track_bar {
            self.ybar.push_back(ybar.expect("memory tracks preconditioned differences"));
            self.stybar.push(&self.s, &self.ybar);
            self.ybty.push(&self.ybar, &self.ybar);
            self.ytybar.push(&self.y, &self.ybar);
        }
    }

    fn evict(&mut self) {
        self.s.pop_front();
        self.y.pop_front();
        self.g.pop_front();
        self.sty.evict();
        self.sts.evict();
        self.yty.evict();
        self.gts.evict();
        if self.track_bar {
            self.ybar.pop_front();
            self.stybar.evict();
            self.ybty.evict();
            self.ytybar.evict();
        }
    }

    /// Maps every stored vector through `f` (e.g. a vector transport) and
    /// recomputes all caches.
    pub fn transform(&mut self, mut f: impl FnMut(&[f64]) -> Vec<f64>) {
        for v in self.s.iter_mut().chain(self.y.iter_mut()).chain(self.ybar.iter_mut()).chain(self.g.iter_mut()) {
            *v = f(v);
        }
        self.rebuild_caches();
    }

    pub fn rebuild_caches(&mut self) {
        self.sty = Cross::rebuild(&self.s, &self.y);
        self.sts = Cross::rebuild(&self.s, &self.s);
        self.yty = Cross::rebuild(&self.y, &self.y);
        self.gts = Cross::rebuild(&self.g, &self.s);
        if self.track_bar {
            self.stybar = Cross::rebuild(&self.s, &self.ybar);
            self.ybty = Cross::rebuild(&self.ybar, &self.ybar);
            self.ytybar = Cross::rebuild(&self.y, &self.ybar);
        }
    }

    pub fn s(&self, i: usize) -> &[f64] {
        &self.s[i]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.y[i]
    }

    pub fn ybar(&self, i: usize) -> &[f64] {
        &self.ybar[i]
    }

    pub fn g_start(&self, i: usize) -> &[f64] {
        &self.g[i]
    }

    /// Difference vector `i` of the requested family.
    pub fn diff(&self, kind: PairKind, i: usize) -> &[f64] {
        match kind {
            PairKind::Gradient => &self.y[i],
            PairKind::Preconditioned => &self.ybar[i],
        }
    }

    /// `s_iᵀ y_j` for the requested family.
    pub fn s_dot_diff(&self, kind: PairKind, i: usize, j: usize) -> f64 {
        match kind {
            PairKind::Gradient => self.sty.get(i, j),
            PairKind::Preconditioned => self.stybar.get(i, j),
        }
    }

    /// `y_iᵀ y_j` within one family.
    pub fn diff_dot_diff(&self, kind: PairKind, i: usize, j: usize) -> f64 {
        match kind {
            PairKind::Gradient => self.yty.get(i, j),
            PairKind::Preconditioned => self.ybty.get(i, j),
        }
    }

    /// `y_iᵀ ȳ_j`.
    pub fn y_dot_ybar(&self, i: usize, j: usize) -> f64 {
        self.ytybar.get(i, j)
    }

    pub fn s_dot_s(&self, i: usize, j: usize) -> f64 {
        self.sts.get(i, j)
    }

    /// `g_iᵀ s_j` with `g_i` the gradient at the start of step `i`.
    pub fn g_dot_s(&self, i: usize, j: usize) -> f64 {
        self.gts.get(i, j)
    }

    fn square(&self, f: impl Fn(usize, usize) -> f64) -> Matrix {
        let m = self.len();
        Matrix::from_fn(m, m, f)
    }

    /// Diagonal of `SᵀY` as a vector.
    pub fn d(&self, kind: PairKind) -> Vec<f64> {
        (0..self.len()).map(|i| self.s_dot_diff(kind, i, i)).collect()
    }

    /// Strictly lower part of `SᵀY`.
    pub fn l(&self, kind: PairKind) -> Matrix {
        self.square(|i, j| if i > j { self.s_dot_diff(kind, i, j) } else { 0.0 })
    }

    /// Upper triangle (with diagonal) of `SᵀY`.
    pub fn r(&self, kind: PairKind) -> Matrix {
        self.square(|i, j| if i <= j { self.s_dot_diff(kind, i, j) } else { 0.0 })
    }

    /// Full `SᵀY`.
    pub fn sty_matrix(&self, kind: PairKind) -> Matrix {
        self.square(|i, j| self.s_dot_diff(kind, i, j))
    }

    /// Strictly lower `−sᵢᵀsⱼ` (Broyden `M`).
    pub fn m_broyden(&self) -> Matrix {
        self.square(|i, j| if i > j { -self.s_dot_s(i, j) } else { 0.0 })
    }

    /// Strictly lower `gᵢᵀsⱼ` (the transformed-preconditioning `M̄`).
    pub fn m_bar(&self) -> Matrix {
        self.square(|i, j| if i > j { self.g_dot_s(i, j) } else { 0.0 })
    }

    /// Largest deviation between the cached products and a recomputation
    /// from the stored vectors.
    pub fn cache_deviation(&self) -> f64 {
        let mut fresh = self.clone();
        fresh.rebuild_caches();
        let m = self.len();
        let mut dev = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let pairs = [
                    (self.sty.get(i, j), fresh.sty.get(i, j)),
                    (self.sts.get(i, j), fresh.sts.get(i, j)),
                    (self.yty.get(i, j), fresh.yty.get(i, j)),
                    (self.gts.get(i, j), fresh.gts.get(i, j)),
                ];
                for (a, b) in pairs {
                    dev = dev.max((a - b).abs());
                }
                if self.track_bar {
                    for (a, b) in [
                        (self.stybar.get(i, j), fresh.stybar.get(i, j)),
                        (self.ybty.get(i, j), fresh.ybty.get(i, j)),
                        (self.ytybar.get(i, j), fresh.ytybar.get(i, j)),
                    ] {
                        dev = dev.max((a - b).abs());
                    }
                }
            }
        }
        dev
    }
}
