//! Tip-cell agents and the vascular network they sweep out.
//!
//! A tip cell occupies one grid square and performs the chemotactically
//! biased walk of [`crate::fields::move_coefficients`] up the angiogenic
//! factor gradient. Every square a tip enters joins the vessel set, owned
//! by the id the tip carried when it first swept the square. Mature tips
//! with free space branch into two child tips at a rate proportional to
//! the local factor level; a tip entering an already-vascularised square
//! fuses with that sprout and one of the two parties, chosen by a fair
//! coin, stops growing. Entering one's own sprout is a self-loop and
//! always retires the mover.

use std::collections::HashMap;

use rand::Rng;

use crate::error::SimError;
use crate::fields::{move_coefficients, GridGeometry, MoveCoefficients, ScalarField, WalkParams};
use crate::tumour::CellId;

/// Tip lineage ids follow the same root-plus-branch-path scheme as cell
/// ids.
pub type TipId = CellId;

/// The agent at a sprout's leading end.
#[derive(Debug, Clone, PartialEq)]
pub struct TipCell {
    pub id: TipId,
    pub square: (usize, usize),
    /// Time since this tip came into being (launch or branch).
    pub age: f64,
    /// Cleared when the tip fuses into another sprout; inactive tips
    /// never move or branch again.
    pub active: bool,
}

impl TipCell {
    pub fn new(id: TipId, square: (usize, usize)) -> Self {
        Self { id, square, age: 0.0, active: true }
    }

    /// Position of the occupied square's centre.
    pub fn position(&self, geometry: &GridGeometry) -> (f64, f64) {
        geometry.center(self.square.0, self.square.1)
    }
}

/// The `n` launch tips, evenly spread along the bottom of the domain at
/// `x = (2i-1)/(2n)`, `y = 0.05`.
pub fn initial_tips(n: usize, geometry: &GridGeometry) -> Vec<TipCell> {
    (1..=n)
        .map(|i| {
            let x = (2 * i - 1) as f64 / (2 * n) as f64;
            TipCell::new(TipId::founder(i as u32), geometry.square_of(x, 0.05))
        })
        .collect()
}

/// The swept vascular network: the set of vessel squares, each owned by
/// the sprout (tip id) that first entered it.
#[derive(Debug, Clone)]
pub struct AngiogenicNetwork {
    geometry: GridGeometry,
    squares: Vec<(usize, usize)>,
    owner: HashMap<(usize, usize), TipId>,
    max_y: f64,
}

impl AngiogenicNetwork {
    pub fn new(geometry: GridGeometry) -> Self {
        Self {
            geometry,
            squares: Vec::new(),
            owner: HashMap::new(),
            max_y: f64::NEG_INFINITY,
        }
    }

    pub fn geometry(&self) -> GridGeometry {
        self.geometry
    }

    pub fn contains(&self, square: (usize, usize)) -> bool {
        self.owner.contains_key(&square)
    }

    pub fn owner_of(&self, square: (usize, usize)) -> Option<&TipId> {
        self.owner.get(&square)
    }

    /// Add a square to the vessel set under the given owner. Returns true
    /// if the square was fresh; an already-swept square keeps its original
    /// owner.
    pub fn record(&mut self, square: (usize, usize), owner: &TipId) -> bool {
        debug_assert!(square.0 < self.geometry.n_x && square.1 < self.geometry.n_y);
        if self.owner.contains_key(&square) {
            return false;
        }
        self.owner.insert(square, owner.clone());
        self.squares.push(square);
        self.max_y = self.max_y.max(self.geometry.node_y(square.1));
        true
    }

    pub fn vessel_count(&self) -> usize {
        self.squares.len()
    }

    /// Vessel-square centres in sweep order (deterministic per run).
    pub fn centers(&self) -> Vec<(f64, f64)> {
        self.squares
            .iter()
            .map(|&(i, j)| self.geometry.center(i, j))
            .collect()
    }

    /// Vessel squares in sweep order.
    pub fn squares(&self) -> &[(usize, usize)] {
        &self.squares
    }

    /// `(square, owner)` rows sorted by square index, for snapshots.
    pub fn sorted_entries(&self) -> Vec<((usize, usize), TipId)> {
        let mut rows: Vec<_> = self
            .owner
            .iter()
            .map(|(sq, id)| (*sq, id.clone()))
            .collect();
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        rows
    }

    /// Highest vessel-square centre so far; `None` while empty. Never
    /// decreases, since vessels never disappear.
    pub fn max_vessel_y(&self) -> Option<f64> {
        (!self.squares.is_empty()).then_some(self.max_y)
    }

    /// Whether any vessel-square centre lies in the target region.
    pub fn reaches(&self, region: &TargetRegion) -> bool {
        self.squares
            .iter()
            .any(|&(i, j)| region.contains(self.geometry.center(i, j)))
    }
}

/// Where vascularization is declared complete.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetRegion {
    /// Everything at or above `min_y`.
    TopStrip { min_y: f64 },
    /// A disc, typically the tumour's bounding disc.
    Disc { center: (f64, f64), radius: f64 },
}

impl TargetRegion {
    pub fn contains(&self, point: (f64, f64)) -> bool {
        match *self {
            TargetRegion::TopStrip { min_y } => point.1 >= min_y,
            TargetRegion::Disc { center, radius } => {
                (point.0 - center.0).powi(2) + (point.1 - center.1).powi(2) <= radius * radius
            }
        }
    }
}

/// One completed tip relocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TipMove {
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// Whether the entered square was new to the vessel set.
    pub entered_fresh: bool,
}

/// One biased-walk step of an active tip. Weights come from the walk
/// coefficients at the tip's square; directions that would leave the grid
/// are dropped and the rest renormalised. A real move updates the tip and
/// sweeps the entered square into the network. Consumes exactly one
/// uniform draw.
pub fn tip_move<R: Rng>(
    tip: &mut TipCell,
    network: &mut AngiogenicNetwork,
    c: &ScalarField,
    dt: f64,
    params: &WalkParams,
    rng: &mut R,
) -> Result<Option<TipMove>, SimError> {
    assert!(tip.active, "inactive tips do not move");
    let g = network.geometry;
    let (i, j) = tip.square;
    let mc = move_coefficients(c, i, j, dt, params)?;

    let mut weights = mc.p;
    for (dir, &(di, dj)) in MoveCoefficients::OFFSETS.iter().enumerate() {
        let (ni, nj) = (i as isize + di, j as isize + dj);
        if ni < 0 || nj < 0 || ni >= g.n_x as isize || nj >= g.n_y as isize {
            weights[dir] = 0.0;
        }
    }
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "no admissible move at {:?}", tip.square);

    let u = rng.gen::<f64>() * total;
    let mut cumulative = 0.0;
    let mut chosen = 0;
    for (dir, &w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            chosen = dir;
            break;
        }
    }
    if chosen == MoveCoefficients::STAY {
        return Ok(None);
    }
    let (di, dj) = MoveCoefficients::OFFSETS[chosen];
    let to = ((i as isize + di) as usize, (j as isize + dj) as usize);
    let entered_fresh = network.record(to, &tip.id);
    tip.square = to;
    Ok(Some(TipMove { from: (i, j), to, entered_fresh }))
}

/// Branch attempt for an active tip. Eligibility: age strictly above `psi`
/// and at least one orthogonal neighbour square not yet vascularised.
/// Eligible tips fire with probability `1 - exp(-λ·dt)` where
/// `λ = c_br·c(tip)/max c`. On firing the tip retires in favour of two
/// age-zero children: one on the old square, one on a uniformly chosen
/// free orthogonal square (which joins the network under the child's id).
/// Draw order: fire draw, then square draw; ineligible tips draw nothing.
pub fn try_branch<R: Rng>(
    tip: &TipCell,
    network: &mut AngiogenicNetwork,
    c: &ScalarField,
    psi: f64,
    c_br: f64,
    dt: f64,
    rng: &mut R,
) -> Option<(TipCell, TipCell)> {
    assert!(tip.active, "inactive tips do not branch");
    if tip.age <= psi {
        return None;
    }
    let g = network.geometry;
    let (i, j) = (tip.square.0 as isize, tip.square.1 as isize);
    let mut free = Vec::with_capacity(4);
    for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
        let (ni, nj) = (i + di, j + dj);
        if ni < 0 || nj < 0 || ni >= g.n_x as isize || nj >= g.n_y as isize {
            continue;
        }
        let sq = (ni as usize, nj as usize);
        if !network.contains(sq) {
            free.push(sq);
        }
    }
    if free.is_empty() {
        return None;
    }

    let c_tip = c.values[[tip.square.0, tip.square.1]];
    let c_max = c.max_value();
    let lambda = if c_max > 0.0 { c_br * c_tip / c_max } else { 0.0 };
    if rng.gen::<f64>() >= 1.0 - (-lambda * dt).exp() {
        return None;
    }

    let target = free[rng.gen_range(0..free.len())];
    let stay_child = TipCell::new(tip.id.daughter(1), tip.square);
    let move_child = TipCell::new(tip.id.daughter(2), target);
    network.record(target, &move_child.id);
    Some((stay_child, move_child))
}

/// What a move into an already-swept square leads to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnastomosisOutcome {
    NoEvent,
    /// The mover ran into its own sprout and retires.
    SelfLoop,
    /// Fusion with another sprout; the coin kept the mover, so the other
    /// sprout's tip (if it still has an active one) retires.
    FuseKeepSelf { other: TipId },
    /// Fusion with another sprout; the coin retires the mover.
    FuseKeepOther { other: TipId },
}

/// Anastomosis check for a just-completed move. Fresh squares and the
/// square the tip left are not encounters. A self-owned square is a
/// self-loop (deterministic retirement); any other owner triggers the
/// fair-coin fusion. Consumes one draw exactly on non-self encounters.
pub fn check_anastomosis<R: Rng>(
    tip: &TipCell,
    mv: &TipMove,
    network: &AngiogenicNetwork,
    rng: &mut R,
) -> AnastomosisOutcome {
    if mv.entered_fresh || mv.to == mv.from {
        return AnastomosisOutcome::NoEvent;
    }
    let owner = network
        .owner_of(mv.to)
        .expect("non-fresh square must have an owner")
        .clone();
    if owner == tip.id {
        return AnastomosisOutcome::SelfLoop;
    }
    if rng.gen::<bool>() {
        AnastomosisOutcome::FuseKeepOther { other: owner }
    } else {
        AnastomosisOutcome::FuseKeepSelf { other: owner }
    }
}

/// Counts elapsed proliferation epochs. Endothelial proliferation extends
/// every active sprout by one forced move per elapsed interval.
#[derive(Debug, Clone)]
pub struct ProliferationClock {
    interval: f64,
    fired: u64,
}

impl ProliferationClock {
    pub fn new(interval: f64) -> Self {
        assert!(interval > 0.0);
        Self { interval, fired: 0 }
    }

    /// Number of whole intervals elapsed by time `t` that have not fired
    /// yet; marks them fired.
    pub fn due_epochs(&mut self, t: f64) -> u64 {
        let target = (t / self.interval).floor() as u64;
        let due = target.saturating_sub(self.fired);
        self.fired = target.max(self.fired);
        due
    }
}
