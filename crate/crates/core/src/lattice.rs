//! Discrete probability space: a recombining Brownian lattice crossed with a
//! single default jump.
//!
//! Before default every step has three branches: Brownian up and down (each
//! with probability `(1 - λ dt) / 2`, `dW = ±√dt`) and a default branch
//! (probability `λ dt`, `dW = 0`). After default only the two Brownian
//! branches remain and the intensity is zero. With this layout any function
//! of the successors is exactly `mean + z dW + k dM`, so the integrands of a
//! backward equation are recovered without residual.
//!
//! Node layout: at step `k` there are `k + 1` alive nodes (indexed by the
//! number of up-moves among `k` Brownian moves) followed by `k` defaulted
//! nodes (up-moves among `k - 1` moves, the default step carrying no
//! Brownian move). Step `k` therefore holds `2k + 1` nodes and starts at
//! global index `k²`; a lattice with `n` steps has `(n + 1)²` nodes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant function of time.
///
/// `Piecewise` holds `values.len() == knots.len() + 1` pieces; piece `i`
/// covers `(knots[i-1], knots[i]]` (left-continuous). A lattice step uses the
/// piece containing its midpoint, which is the left-continuous value whenever
/// the knots sit on the time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Schedule {
    Constant(f64),
    Piecewise { knots: Vec<f64>, values: Vec<f64> },
}

impl Schedule {
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant(v) => *v,
            Schedule::Piecewise { knots, values } => {
                let idx = knots.iter().position(|&k| t <= k).unwrap_or(knots.len());
                values[idx]
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Schedule::Constant(v) => std::slice::from_ref(v),
            Schedule::Piecewise { values, .. } => values,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if let Schedule::Piecewise { knots, values } = self {
            if values.len() != knots.len() + 1 {
                return Err(Error::InvalidParams(format!(
                    "{name}: piecewise schedule needs knots.len() + 1 values"
                )));
            }
            if knots.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParams(format!("{name}: knots must increase")));
            }
        }
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name}: non-finite value")));
        }
        Ok(())
    }
}

impl From<f64> for Schedule {
    fn from(v: f64) -> Self {
        Schedule::Constant(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub horizon: f64,
    pub n_steps: usize,
}

impl LatticeParams {
    pub fn new(horizon: f64, n_steps: usize) -> Self {
        Self { horizon, n_steps }
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: Schedule,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
    pub lambda_bar: Schedule,
    pub s1_0: f64,
    pub s2_0: f64,
}

impl MarketParams {
    /// Risk premium of the first asset at short rate `r`.
    pub fn theta1(&self, r: f64) -> f64 {
        (self.mu1 - r) / self.sigma1
    }

    /// `θ² λ` for the defaultable asset; zero when `λ = 0`.
    pub fn theta2_lambda(&self, r: f64, lambda: f64) -> f64 {
        if lambda > 0.0 {
            self.sigma2 * self.theta1(r) - self.mu2 + r
        } else {
            0.0
        }
    }

    pub fn theta2(&self, r: f64, lambda: f64) -> f64 {
        if lambda > 0.0 {
            self.theta2_lambda(r, lambda) / lambda
        } else {
            0.0
        }
    }

    fn validate(&self) -> Result<()> {
        self.r.validate("r")?;
        self.lambda_bar.validate("lambda_bar")?;
        for (name, v) in [
            ("mu1", self.mu1),
            ("sigma1", self.sigma1),
            ("mu2", self.mu2),
            ("sigma2", self.sigma2),
            ("s1_0", self.s1_0),
            ("s2_0", self.s2_0),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.sigma1 <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::InvalidParams("sigma1 and sigma2 must be > 0".into()));
        }
        if self.lambda_bar.values().iter().any(|&l| l < 0.0) {
            return Err(Error::InvalidParams("lambda_bar must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DefaultStatus {
    Alive,
    Defaulted,
}

impl DefaultStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DefaultStatus::Alive => "alive",
            DefaultStatus::Defaulted => "defaulted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub step: usize,
    /// Number of Brownian up-moves.
    pub j: usize,
    pub status: DefaultStatus,
}

impl Node {
    /// Number of Brownian moves taken to reach this node.
    pub fn moves(&self) -> usize {
        match self.status {
            DefaultStatus::Alive => self.step,
            DefaultStatus::Defaulted => self.step - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub to: NodeId,
    pub p: f64,
    pub dw: f64,
    pub dn: f64,
    pub dm: f64,
}

/// Result of regressing successor values on `(1, dW, dM)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub mean: f64,
    pub z: f64,
    pub k: f64,
}

/// Everything a driver may look at when evaluated at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeContext {
    pub node: NodeId,
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Intensity at the node: `λ̄` at the step when alive, `0` once defaulted.
    pub lambda: f64,
    pub r: f64,
    pub status: DefaultStatus,
    pub s1: f64,
}

#[derive(Debug, Clone)]
struct NodeInfo {
    node: Node,
    w: f64,
    s1: f64,
    s2: f64,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    params: LatticeParams,
    market: MarketParams,
    dt: f64,
    r: Vec<f64>,
    lambda_bar: Vec<f64>,
    s0: Vec<f64>,
    nodes: Vec<NodeInfo>,
    transitions: Vec<Vec<Transition>>,
}

/// Total number of nodes in a lattice with `n_steps` steps.
pub fn node_count(n_steps: usize) -> usize {
    (n_steps + 1) * (n_steps + 1)
}

/// Number of nodes at a single step.
pub fn nodes_at_step(step: usize) -> usize {
    2 * step + 1
}

pub fn build_lattice(lp: LatticeParams, mp: MarketParams) -> Result<Lattice> {
    if lp.n_steps == 0 {
        return Err(Error::InvalidParams("n_steps must be >= 1".into()));
    }
    if !(lp.horizon > 0.0) || !lp.horizon.is_finite() {
        return Err(Error::InvalidParams("horizon must be > 0".into()));
    }
    mp.validate()?;

    let n = lp.n_steps;
    let dt = lp.dt();
    let h = dt.sqrt();
    let mid = |k: usize| (k as f64 + 0.5) * dt;
    let r: Vec<f64> = (0..n).map(|k| mp.r.value_at(mid(k))).collect();
    let lambda_bar: Vec<f64> = (0..n).map(|k| mp.lambda_bar.value_at(mid(k))).collect();
    for (k, &l) in lambda_bar.iter().enumerate() {
        if l * dt >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "lambda_bar * dt = {} >= 1 at step {k}",
                l * dt
            )));
        }
    }

    let mut s0 = Vec::with_capacity(n + 1);
    s0.push(1.0);
    for k in 0..n {
        s0.push(s0[k] * (1.0 + r[k] * dt));
    }
    // Integrated intensity up to each step, for the pre-default drift of S².
    let mut cum_lambda = vec![0.0; n + 1];
    for k in 0..n {
        cum_lambda[k + 1] = cum_lambda[k] + lambda_bar[k] * dt;
    }

    let mut nodes = Vec::with_capacity(node_count(n));
    for k in 0..=n {
        let t = k as f64 * dt;
        for j in 0..=k {
            let w = (2.0 * j as f64 - k as f64) * h;
            let s1 = mp.s1_0 * (mp.sigma1 * w + (mp.mu1 - 0.5 * mp.sigma1 * mp.sigma1) * t).exp();
            let s2 = mp.s2_0
                * (mp.sigma2 * w + (mp.mu2 - 0.5 * mp.sigma2 * mp.sigma2) * t + cum_lambda[k])
                    .exp();
            nodes.push(NodeInfo {
                node: Node {
                    step: k,
                    j,
                    status: DefaultStatus::Alive,
                },
                w,
                s1,
                s2,
            });
        }
        for j in 0..k {
            let w = (2.0 * j as f64 - (k as f64 - 1.0)) * h;
            let s1 = mp.s1_0 * (mp.sigma1 * w + (mp.mu1 - 0.5 * mp.sigma1 * mp.sigma1) * t).exp();
            nodes.push(NodeInfo {
                node: Node {
                    step: k,
                    j,
                    status: DefaultStatus::Defaulted,
                },
                w,
                s1,
                s2: 0.0,
            });
        }
    }
    debug_assert_eq!(nodes.len(), node_count(n));

    let mut transitions = Vec::with_capacity(nodes.len());
    for info in &nodes {
        let Node { step: k, j, status } = info.node;
        if k == n {
            transitions.push(Vec::new());
            continue;
        }
        let ts = match status {
            DefaultStatus::Alive => {
                let l = lambda_bar[k] * dt;
                let up = alive_id(k + 1, j + 1);
                let down = alive_id(k + 1, j);
                let mut v = vec![
                    Transition {
                        to: up,
                        p: 0.5 * (1.0 - l),
                        dw: h,
                        dn: 0.0,
                        dm: -l,
                    },
                    Transition {
                        to: down,
                        p: 0.5 * (1.0 - l),
                        dw: -h,
                        dn: 0.0,
                        dm: -l,
                    },
                ];
                if l > 0.0 {
                    v.push(Transition {
                        to: defaulted_id(k + 1, j),
                        p: l,
                        dw: 0.0,
                        dn: 1.0,
                        dm: 1.0 - l,
                    });
                }
                v
            }
            DefaultStatus::Defaulted => vec![
                Transition {
                    to: defaulted_id(k + 1, j + 1),
                    p: 0.5,
                    dw: h,
                    dn: 0.0,
                    dm: 0.0,
                },
                Transition {
                    to: defaulted_id(k + 1, j),
                    p: 0.5,
                    dw: -h,
                    dn: 0.0,
                    dm: 0.0,
                },
            ],
        };
        transitions.push(ts);
    }

    Ok(Lattice {
        params: lp,
        market: mp,
        dt,
        r,
        lambda_bar,
        s0,
        nodes,
        transitions,
    })
}

fn alive_id(step: usize, j: usize) -> NodeId {
    NodeId(step * step + j)
}

fn defaulted_id(step: usize, j: usize) -> NodeId {
    NodeId(step * step + step + 1 + j)
}

impl Lattice {
    pub fn params(&self) -> LatticeParams {
        self.params
    }

    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    pub fn n_steps(&self) -> usize {
        self.params.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Short rate on step `k` (`k < n_steps`).
    pub fn rate(&self, step: usize) -> f64 {
        self.r[step.min(self.r.len() - 1)]
    }

    /// Pre-default intensity on step `k`.
    pub fn lambda_bar(&self, step: usize) -> f64 {
        self.lambda_bar[step.min(self.lambda_bar.len() - 1)]
    }

    /// Intensity seen at a node: zero once defaulted or at maturity.
    pub fn lambda_at(&self, id: NodeId) -> f64 {
        let node = self.node(id);
        if node.status == DefaultStatus::Defaulted || node.step == self.n_steps() {
            0.0
        } else {
            self.lambda_bar[node.step]
        }
    }

    pub fn id(&self, node: Node) -> Option<NodeId> {
        if node.step > self.n_steps() {
            return None;
        }
        match node.status {
            DefaultStatus::Alive if node.j <= node.step => Some(alive_id(node.step, node.j)),
            DefaultStatus::Defaulted if node.step >= 1 && node.j < node.step => {
                Some(defaulted_id(node.step, node.j))
            }
            _ => None,
        }
    }

    pub fn node(&self, id: NodeId) -> Node {
        self.nodes[id.0].node
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.nodes.len()
    }

    /// Ids of all nodes at `step`, alive first.
    pub fn layer(&self, step: usize) -> std::ops::Range<usize> {
        step * step..(step + 1) * (step + 1)
    }

    pub fn layer_ids(&self, step: usize) -> impl Iterator<Item = NodeId> {
        self.layer(step).map(NodeId)
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn is_terminal(&self, id: NodeId) -> bool {
        self.node(id).step == self.n_steps()
    }

    pub fn transitions(&self, id: NodeId) -> &[Transition] {
        &self.transitions[id.0]
    }

    /// Brownian coordinate of the node.
    pub fn w(&self, id: NodeId) -> f64 {
        self.nodes[id.0].w
    }

    pub fn s0(&self, step: usize) -> f64 {
        self.s0[step]
    }

    pub fn s1(&self, id: NodeId) -> f64 {
        self.nodes[id.0].s1
    }

    pub fn s2(&self, id: NodeId) -> f64 {
        self.nodes[id.0].s2
    }

    pub fn context(&self, id: NodeId) -> NodeContext {
        let node = self.node(id);
        NodeContext {
            node: id,
            step: node.step,
            t: self.time(node.step),
            dt: self.dt,
            lambda: self.lambda_at(id),
            r: self.rate(node.step),
            status: node.status,
            s1: self.s1(id),
        }
    }

    /// `E[dW²]` over the branches leaving `id`.
    pub fn var_dw(&self, id: NodeId) -> f64 {
        self.transitions(id).iter().map(|t| t.p * t.dw * t.dw).sum()
    }

    /// `E[dM²]` over the branches leaving `id`.
    pub fn var_dm(&self, id: NodeId) -> f64 {
        self.transitions(id).iter().map(|t| t.p * t.dm * t.dm).sum()
    }

    /// Regress successor values (ordered as [`Lattice::transitions`]) on
    /// `(1, dW, dM)`.
    pub fn conditional_expectation(&self, id: NodeId, values: &[f64]) -> Regression {
        let ts = self.transitions(id);
        assert_eq!(ts.len(), values.len(), "one value per successor");
        let mut mean = 0.0;
        let mut ew = 0.0;
        let mut em = 0.0;
        for (t, &v) in ts.iter().zip(values) {
            mean += t.p * v;
            ew += t.p * v * t.dw;
            em += t.p * v * t.dm;
        }
        let vw = self.var_dw(id);
        let vm = self.var_dm(id);
        let z = if vw > 0.0 { ew / vw } else { 0.0 };
        let k = if vm > 0.0 { em / vm } else { 0.0 };
        Regression { mean, z, k }
    }

    /// Values at the successors of `id` gathered from a node-indexed array.
    pub fn successor_values(&self, id: NodeId, values: &[f64]) -> Vec<f64> {
        self.transitions(id)
            .iter()
            .map(|t| values[t.to.0])
            .collect()
    }

    /// Sufficient condition for the one-step backward map to be monotone in
    /// the successor values, for a driver with λ-constant `c` satisfying the
    /// Royer condition: `c (√dt + √λ dt) <= 1 - λ dt` at every step.
    pub fn is_monotone_for(&self, c: f64) -> bool {
        let dt = self.dt;
        if c * dt >= 1.0 {
            return false;
        }
        self.lambda_bar
            .iter()
            .all(|&l| c * (dt.sqrt() + l.sqrt() * dt) <= 1.0 - l * dt)
    }

    /// Largest `c` for which [`Lattice::is_monotone_for`] holds.
    pub fn max_monotone_constant(&self) -> f64 {
        let dt = self.dt;
        self.lambda_bar
            .iter()
            .map(|&l| (1.0 - l * dt) / (dt.sqrt() + l.sqrt() * dt))
            .fold(1.0 / dt, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn market(lambda: f64) -> MarketParams {
        MarketParams {
            r: 0.02.into(),
            mu1: 0.05,
            sigma1: 0.2,
            mu2: 0.04,
            sigma2: 0.3,
            lambda_bar: lambda.into(),
            s1_0: 100.0,
            s2_0: 50.0,
        }
    }

    #[test]
    fn zero_intensity_has_no_default_branch() {
        let lat = build_lattice(LatticeParams::new(1.0, 1), market(0.0)).unwrap();
        let ts = lat.transitions(lat.root());
        assert_eq!(ts.len(), 2);
        assert!(ts.iter().all(|t| t.p == 0.5 && t.dn == 0.0));
    }

    #[test]
    fn positive_intensity_gives_three_branches() {
        let lat = build_lattice(LatticeParams::new(1.0, 1), market(0.1)).unwrap();
        let ps: Vec<f64> = lat.transitions(lat.root()).iter().map(|t| t.p).collect();
        assert_eq!(ps.len(), 3);
        assert!((ps[0] - 0.45).abs() < 1e-15);
        assert!((ps[1] - 0.45).abs() < 1e-15);
        assert!((ps[2] - 0.1).abs() < 1e-15);
        assert!((ps.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(
            build_lattice(LatticeParams::new(1.0, 1), market(1.0)),
            Err(Error::InvalidParams(_))
        ));
        let mut m = market(0.1);
        m.sigma1 = 0.0;
        assert!(build_lattice(LatticeParams::new(1.0, 4), m).is_err());
        assert!(build_lattice(LatticeParams::new(1.0, 0), market(0.1)).is_err());
    }

    #[test]
    fn martingale_increments_and_probabilities() {
        let lat = build_lattice(LatticeParams::new(2.0, 6), market(0.3)).unwrap();
        for id in lat.ids().filter(|&id| !lat.is_terminal(id)) {
            let ts = lat.transitions(id);
            let sum: f64 = ts.iter().map(|t| t.p).sum();
            assert!((sum - 1.0).abs() < 1e-14);
            assert!(ts.iter().all(|t| t.p >= 0.0));
            let ew: f64 = ts.iter().map(|t| t.p * t.dw).sum();
            let em: f64 = ts.iter().map(|t| t.p * t.dm).sum();
            let ewm: f64 = ts.iter().map(|t| t.p * t.dw * t.dm).sum();
            assert!(ew.abs() < 1e-14 && em.abs() < 1e-14 && ewm.abs() < 1e-14);
            if lat.node(id).status == DefaultStatus::Defaulted {
                assert_eq!(ts.len(), 2);
                assert!(ts.iter().all(|t| t.dm == 0.0));
            }
        }
    }

    #[test]
    fn node_counts_match_closed_form() {
        for n in 1..8 {
            let lat = build_lattice(LatticeParams::new(1.0, n), market(0.2)).unwrap();
            assert_eq!(lat.len(), node_count(n));
            for k in 0..=n {
                assert_eq!(lat.layer(k).len(), nodes_at_step(k));
                let alive = lat
                    .layer_ids(k)
                    .filter(|&i| lat.node(i).status == DefaultStatus::Alive);
                assert_eq!(alive.count(), k + 1);
            }
            for id in lat.ids() {
                assert_eq!(lat.id(lat.node(id)), Some(id));
            }
        }
    }

    #[test]
    fn defaulted_asset_price_vanishes() {
        let lat = build_lattice(LatticeParams::new(1.0, 5), market(0.4)).unwrap();
        for id in lat.ids() {
            if lat.node(id).status == DefaultStatus::Defaulted {
                assert_eq!(lat.s2(id), 0.0);
                for t in lat.transitions(id) {
                    assert_eq!(lat.node(t.to).status, DefaultStatus::Defaulted);
                }
            } else {
                assert!(lat.s2(id) > 0.0);
            }
        }
    }

    #[test]
    fn s1_closed_form() {
        let lat = build_lattice(LatticeParams::new(1.0, 4), market(0.2)).unwrap();
        let dt: f64 = 0.25;
        let id = lat
            .id(Node {
                step: 3,
                j: 2,
                status: DefaultStatus::Alive,
            })
            .unwrap();
        let want = 100.0 * (0.2 * (1.0 * dt.sqrt()) + (0.05 - 0.02) * 0.75).exp();
        assert!((lat.s1(id) - want).abs() < 1e-12);
    }

    #[test]
    fn regression_examples() {
        let lat = build_lattice(LatticeParams::new(1.0, 1), market(0.1)).unwrap();
        let root = lat.root();
        let ts = lat.transitions(root).to_vec();

        let r = lat.conditional_expectation(root, &[3.0, 3.0, 3.0]);
        assert!((r.mean - 3.0).abs() < 1e-15 && r.z.abs() < 1e-15 && r.k.abs() < 1e-15);

        let dw: Vec<f64> = ts.iter().map(|t| t.dw).collect();
        let r = lat.conditional_expectation(root, &dw);
        assert!(r.mean.abs() < 1e-15 && (r.z - 1.0).abs() < 1e-14 && r.k.abs() < 1e-15);

        // Oracle for dM: probabilities {0.45, 0.45, 0.1}, dM = {-0.1, -0.1, 0.9}.
        // E[dM] = 0, E[dM²] = 0.9 * 0.01 + 0.1 * 0.81 = 0.09, E[dM * dM] / 0.09 = 1.
        let dm: Vec<f64> = ts.iter().map(|t| t.dm).collect();
        assert_eq!(dm, vec![-0.1, -0.1, 0.9]);
        let r = lat.conditional_expectation(root, &dm);
        assert!(r.mean.abs() < 1e-15 && r.z.abs() < 1e-15 && (r.k - 1.0).abs() < 1e-14);
    }

    #[test]
    fn regression_reconstructs_successors() {
        let lat = build_lattice(LatticeParams::new(1.0, 3), market(0.3)).unwrap();
        for id in lat.ids().filter(|&id| !lat.is_terminal(id)) {
            let vals: Vec<f64> = (0..lat.transitions(id).len())
                .map(|i| (i as f64 * 1.7 - 0.3).powi(2))
                .collect();
            let r = lat.conditional_expectation(id, &vals);
            for (t, v) in lat.transitions(id).iter().zip(&vals) {
                assert!((r.mean + r.z * t.dw + r.k * t.dm - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn piecewise_schedule_is_left_continuous() {
        let s = Schedule::Piecewise {
            knots: vec![0.5],
            values: vec![0.01, 0.03],
        };
        assert_eq!(s.value_at(0.5), 0.01);
        assert_eq!(s.value_at(0.50001), 0.03);
        let mut m = market(0.1);
        m.r = s;
        let lat = build_lattice(LatticeParams::new(1.0, 4), m).unwrap();
        assert_eq!(lat.rate(1), 0.01);
        assert_eq!(lat.rate(2), 0.03);
    }
}
