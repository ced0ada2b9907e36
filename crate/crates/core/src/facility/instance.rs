use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Piecewise-linear open curve.
///
/// Parameter `t` in `[0, 1]` is spread uniformly over the segments: segment
/// `s` covers `[s / S, (s + 1) / S]` where `S` is the segment count. Distances
/// are arc lengths, accumulated segment by segment. Injectivity of the curve
/// is assumed and not checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Vec<f64>>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidInstance(
                "a curve needs at least 2 vertices".into(),
            ));
        }
        let dim = vertices[0].len();
        if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidInstance(
                "curve vertices must share a positive dimension".into(),
            ));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInstance("non-finite curve vertex".into()));
        }
        let mut cumulative = Vec::with_capacity(vertices.len());
        cumulative.push(0.0);
        for pair in vertices.windows(2) {
            let seg = euclidean(&pair[0], &pair[1]);
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        Ok(Self {
            vertices,
            cumulative,
        })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let segments = self.vertices.len() - 1;
        let scaled = t.clamp(0.0, 1.0) * segments as f64;
        let seg = (scaled.floor() as usize).min(segments - 1);
        (seg, scaled - seg as f64)
    }

    /// Arc length from the start of the curve to parameter `t`.
    pub fn arc_position(&self, t: f64) -> f64 {
        let (seg, frac) = self.locate(t);
        let len = self.cumulative[seg + 1] - self.cumulative[seg];
        self.cumulative[seg] + frac * len
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        let (seg, frac) = self.locate(t);
        let (a, b) = (&self.vertices[seg], &self.vertices[seg + 1]);
        a.iter().zip(b).map(|(x, y)| x + frac * (y - x)).collect()
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Space {
    Line,
    L1 {
        dim: usize,
    },
    Curve(Polyline),
    /// Unweighted star; node 0 is the center, nodes `1..nodes` are leaves.
    StarTree {
        nodes: usize,
    },
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Line => "line",
            Space::L1 { .. } => "l1",
            Space::Curve(_) => "curve",
            Space::StarTree { .. } => "star_tree",
        }
    }
}

/// A location in one of the supported spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum Position {
    Real(f64),
    Vector(Vec<f64>),
    /// Curve parameter in `[0, 1]`.
    Param(f64),
    Node(usize),
}

impl Position {
    pub fn as_real(&self) -> Option<f64> {
        match self {
            Position::Real(x) | Position::Param(x) => Some(*x),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    space: Space,
    points: Vec<Position>,
}

impl Instance {
    pub fn new(space: Space, points: Vec<Position>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        let instance = Self { space, points };
        for p in &instance.points {
            instance.check_position(p)?;
        }
        if let Space::StarTree { nodes } = instance.space {
            if nodes != instance.points.len() {
                return Err(Error::InvalidInstance(format!(
                    "star tree with {nodes} nodes needs exactly {nodes} agents"
                )));
            }
            let mut seen = vec![false; nodes];
            for p in &instance.points {
                if let Position::Node(v) = p {
                    if std::mem::replace(&mut seen[*v], true) {
                        return Err(Error::InvalidInstance(format!("node {v} occupied twice")));
                    }
                }
            }
        }
        Ok(instance)
    }

    pub fn line(points: Vec<f64>) -> Result<Self> {
        Self::new(
            Space::Line,
            points.into_iter().map(Position::Real).collect(),
        )
    }

    pub fn l1(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            Space::L1 { dim },
            points.into_iter().map(Position::Vector).collect(),
        )
    }

    pub fn curve(curve: Polyline, params: Vec<f64>) -> Result<Self> {
        Self::new(
            Space::Curve(curve),
            params.into_iter().map(Position::Param).collect(),
        )
    }

    /// `n` agents uniform on `[0, 1)`.
    pub fn random_line(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::line((0..n).map(|_| rng.random::<f64>()).collect())
    }

    /// `n` agents uniform on the unit cube of dimension `dim`.
    pub fn random_l1(n: usize, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::l1(
            dim,
            (0..n)
                .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
                .collect(),
        )
    }

    /// Star with `n` nodes and one agent on every node.
    pub fn star(n: usize) -> Result<Self> {
        Self::new(
            Space::StarTree { nodes: n },
            (0..n).map(Position::Node).collect(),
        )
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn points(&self) -> &[Position] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Scalar key that orders agents along a one-dimensional space: the
    /// coordinate on a line, the arc position on a curve.
    pub(crate) fn scalar_key(&self, p: &Position) -> Option<f64> {
        match (&self.space, p) {
            (Space::Line, Position::Real(x)) => Some(*x),
            (Space::Curve(c), Position::Param(t)) => Some(c.arc_position(*t)),
            _ => None,
        }
    }

    pub fn check_position(&self, p: &Position) -> Result<()> {
        let ok = match (&self.space, p) {
            (Space::Line, Position::Real(x)) => x.is_finite(),
            (Space::L1 { dim }, Position::Vector(v)) => {
                v.len() == *dim && v.iter().all(|x| x.is_finite())
            }
            (Space::Curve(_), Position::Param(t)) => (0.0..=1.0).contains(t),
            (Space::StarTree { nodes }, Position::Node(v)) => v < nodes,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{p:?} is not a valid {} position",
                self.space.name()
            )))
        }
    }

    pub fn distance(&self, a: &Position, b: &Position) -> Result<f64> {
        self.check_position(a)?;
        self.check_position(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    pub(crate) fn distance_unchecked(&self, a: &Position, b: &Position) -> f64 {
        match (&self.space, a, b) {
            (Space::Line, Position::Real(x), Position::Real(y)) => (x - y).abs(),
            (Space::L1 { .. }, Position::Vector(x), Position::Vector(y)) => {
                x.iter().zip(y).map(|(p, q)| (p - q).abs()).sum()
            }
            (Space::Curve(c), Position::Param(s), Position::Param(t)) => {
                (c.arc_position(*s) - c.arc_position(*t)).abs()
            }
            (Space::StarTree { .. }, Position::Node(u), Position::Node(v)) => {
                if u == v {
                    0.0
                } else if *u == 0 || *v == 0 {
                    1.0
                } else {
                    2.0
                }
            }
            _ => unreachable!("positions validated against the space"),
        }
    }

    /// Line instance holding coordinate `j` of every agent.
    pub fn coordinate(&self, j: usize) -> Result<Instance> {
        match self.space {
            Space::L1 { dim } if j < dim => Instance::line(
                self.points
                    .iter()
                    .map(|p| match p {
                        Position::Vector(v) => v[j],
                        _ => unreachable!(),
                    })
                    .collect(),
            ),
            _ => Err(Error::SpaceMismatch(format!(
                "no coordinate {j} in a {} instance",
                self.space.name()
            ))),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&InstanceFile::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        file.try_into()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawPoint {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// On-disk layout: `{"space": "...", "points": [...]}` plus `dim` for `l1`
/// and `vertices` for `curve`.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    space: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Vec<f64>>>,
    points: Vec<RawPoint>,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        let points = inst
            .points
            .iter()
            .map(|p| match p {
                Position::Real(x) | Position::Param(x) => RawPoint::Scalar(*x),
                Position::Vector(v) => RawPoint::Vector(v.clone()),
                Position::Node(v) => RawPoint::Scalar(*v as f64),
            })
            .collect();
        let (dim, vertices) = match &inst.space {
            Space::L1 { dim } => (Some(*dim), None),
            Space::Curve(c) => (None, Some(c.vertices.clone())),
            _ => (None, None),
        };
        InstanceFile {
            space: inst.space.name().to_string(),
            dim,
            vertices,
            points,
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let scalar = |p: RawPoint| match p {
            RawPoint::Scalar(x) => Ok(x),
            RawPoint::Vector(_) => Err(Error::SpaceMismatch(format!(
                "vector point in a {} instance",
                file.space
            ))),
        };
        match file.space.as_str() {
            "line" => Instance::line(file.points.into_iter().map(scalar).collect::<Result<_>>()?),
            "l1" => {
                let points = file
                    .points
                    .into_iter()
                    .map(|p| match p {
                        RawPoint::Vector(v) => Ok(v),
                        RawPoint::Scalar(_) => Err(Error::SpaceMismatch(
                            "scalar point in an l1 instance".into(),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dim = file
                    .dim
                    .or_else(|| points.first().map(Vec::len))
                    .unwrap_or(0);
                Instance::l1(dim, points)
            }
            "curve" => {
                let vertices = file.vertices.clone().ok_or_else(|| {
                    Error::InvalidInstance("curve instance without vertices".into())
                })?;
                Instance::curve(
                    Polyline::new(vertices)?,
                    file.points.into_iter().map(scalar).collect::<Result<_>>()?,
                )
            }
            "star_tree" => {
                let nodes = file
                    .points
                    .into_iter()
                    .map(|p| {
                        let x = scalar(p)?;
                        if x < 0.0 || x.fract() != 0.0 {
                            return Err(Error::InvalidInstance(format!("bad node id {x}")));
                        }
                        Ok(Position::Node(x as usize))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Instance::new(Space::StarTree { nodes: nodes.len() }, nodes)
            }
            other => Err(Error::InvalidInstance(format!("unknown space {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_distances() {
        let star = Instance::star(4).unwrap();
        let d = |a, b| {
            star.distance(&Position::Node(a), &Position::Node(b))
                .unwrap()
        };
        assert_eq!(d(0, 3), 1.0);
        assert_eq!(d(2, 3), 2.0);
        assert_eq!(d(2, 2), 0.0);
    }

    #[test]
    fn star_needs_one_agent_per_node() {
        let dup = vec![Position::Node(0), Position::Node(1), Position::Node(1)];
        assert!(Instance::new(Space::StarTree { nodes: 3 }, dup).is_err());
        let out = vec![Position::Node(0), Position::Node(5)];
        assert!(Instance::new(Space::StarTree { nodes: 2 }, out).is_err());
    }

    #[test]
    fn curve_parameters_must_lie_in_unit_interval() {
        let c = Polyline::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(Instance::curve(c.clone(), vec![0.0, 1.0]).is_ok());
        assert!(Instance::curve(c, vec![1.5]).is_err());
    }

    #[test]
    fn polyline_arc_length() {
        // An L-shaped curve: 3 units right, then 4 units up.
        let c = Polyline::new(vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(c.total_length(), 7.0);
        assert_eq!(c.arc_position(0.5), 3.0);
        assert_eq!(c.arc_position(0.75), 5.0);
        assert_eq!(c.point_at(0.75), vec![3.0, 2.0]);
        assert_eq!(c.arc_position(1.0), 7.0);
    }

    #[test]
    fn empty_instance_rejected() {
        assert!(Instance::line(vec![]).is_err());
    }

    #[test]
    fn mismatched_position_is_an_error() {
        let inst = Instance::line(vec![1.0, 2.0]).unwrap();
        let err = inst
            .distance(&Position::Node(0), &Position::Real(1.0))
            .unwrap_err();
        assert!(err.to_string().starts_with("space mismatch"));
    }

    #[test]
    fn json_layout() {
        let inst = Instance::line(vec![1.0, 2.5]).unwrap();
        assert_eq!(
            inst.to_json().unwrap(),
            r#"{"space":"line","points":[1.0,2.5]}"#
        );
        let l1 = Instance::from_json(r#"{"space":"l1","points":[[0,0],[2,2]]}"#).unwrap();
        assert_eq!(l1.space(), &Space::L1 { dim: 2 });
        let star = Instance::from_json(r#"{"space":"star_tree","points":[0,1,2]}"#).unwrap();
        assert_eq!(star.n(), 3);
        let curve = Instance::star(5).unwrap();
        assert_eq!(
            Instance::from_json(&curve.to_json().unwrap()).unwrap(),
            curve
        );
    }
}
