//! Reverse-mode tape over the closed operation set of [`FieldOps`].
//!
//! Every operation is evaluated when it is recorded, so forward values are
//! always available; [`GradientTape::backward`] then walks the nodes in
//! reverse. Values are stored densely, so memory grows with
//! `nodes * voxels`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::{convolve, convolve_adjoint, round_half_up, sigmoid, FieldOps};
use crate::kernels::Kernel;
use crate::volume::Shape;

/// Handle to a node of a [`GradientTape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Kind of a recorded node, for structural inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Input,
    Constant,
    Conv,
    Add,
    Sub,
    Mul,
    Scale,
    Gate,
    Sigmoid,
    Log,
    SteRound,
}

#[derive(Debug, Clone)]
enum Op {
    Input,
    Constant,
    Conv(NodeId, Vec<([isize; 3], f64)>),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    Scale(NodeId, f64),
    Gate(NodeId, f64),
    Sigmoid(NodeId),
    Log(NodeId),
    SteRound(NodeId),
}

impl Op {
    fn kind(&self) -> OpKind {
        match self {
            Op::Input => OpKind::Input,
            Op::Constant => OpKind::Constant,
            Op::Conv(..) => OpKind::Conv,
            Op::Add(..) => OpKind::Add,
            Op::Sub(..) => OpKind::Sub,
            Op::Mul(..) => OpKind::Mul,
            Op::Scale(..) => OpKind::Scale,
            Op::Gate(..) => OpKind::Gate,
            Op::Sigmoid(_) => OpKind::Sigmoid,
            Op::Log(_) => OpKind::Log,
            Op::SteRound(_) => OpKind::SteRound,
        }
    }

    fn operands(&self) -> Vec<NodeId> {
        match *self {
            Op::Input | Op::Constant => vec![],
            Op::Conv(a, _)
            | Op::Scale(a, _)
            | Op::Gate(a, _)
            | Op::Sigmoid(a)
            | Op::Log(a)
            | Op::SteRound(a) => {
                vec![a]
            }
            Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => vec![a, b],
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    value: Vec<f64>,
}

/// Gradients of one backward pass, keyed by input node.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gradients {
    inputs: BTreeMap<NodeId, Vec<f64>>,
}

impl Gradients {
    pub fn get(&self, input: NodeId) -> Option<&[f64]> {
        self.inputs.get(&input).map(Vec::as_slice)
    }

    pub fn take(&mut self, input: NodeId) -> Option<Vec<f64>> {
        self.inputs.remove(&input)
    }
}

#[derive(Debug, Clone)]
pub struct GradientTape {
    shape: Shape,
    nodes: Vec<Node>,
}

impl GradientTape {
    pub fn new(shape: Shape) -> Self {
        GradientTape {
            shape,
            nodes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A leaf whose gradient is reported by [`GradientTape::backward`].
    pub fn input(&mut self, values: Vec<f64>) -> NodeId {
        assert_eq!(values.len(), self.shape.len(), "input length mismatch");
        self.push(Op::Input, values)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    pub fn kind(&self, id: NodeId) -> OpKind {
        self.nodes[id.0].op.kind()
    }

    pub fn operands(&self, id: NodeId) -> Vec<NodeId> {
        self.nodes[id.0].op.operands()
    }

    pub fn nodes_of_kind(&self, kind: OpKind) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(move |(_, n)| n.op.kind() == kind)
            .map(|(i, _)| NodeId(i))
    }

    /// Approximate memory held by stored forward values, in bytes.
    pub fn value_bytes(&self) -> usize {
        self.nodes.len() * self.shape.len() * std::mem::size_of::<f64>()
    }

    fn push(&mut self, op: Op, value: Vec<f64>) -> NodeId {
        debug_assert!(op.operands().iter().all(|o| o.0 < self.nodes.len()));
        self.nodes.push(Node { op, value });
        NodeId(self.nodes.len() - 1)
    }

    fn unary(&mut self, a: NodeId, op: Op, f: impl Fn(f64) -> f64) -> NodeId {
        let value = self.nodes[a.0].value.iter().map(|&v| f(v)).collect();
        self.push(op, value)
    }

    fn binary(&mut self, a: NodeId, b: NodeId, op: Op, f: impl Fn(f64, f64) -> f64) -> NodeId {
        let va = &self.nodes[a.0].value;
        let vb = &self.nodes[b.0].value;
        let value = va.iter().zip(vb).map(|(&x, &y)| f(x, y)).collect();
        self.push(op, value)
    }

    /// Vector-Jacobian product of a single node: the contribution of
    /// `upstream` (the gradient at `id`) to each operand, in operand order.
    pub fn vjp(&self, id: NodeId, upstream: &[f64]) -> Vec<Vec<f64>> {
        let node = &self.nodes[id.0];
        let val = |n: NodeId| &self.nodes[n.0].value;
        let zip = |a: &[f64], f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            upstream.iter().zip(a).map(|(&g, &x)| f(g, x)).collect()
        };
        match &node.op {
            Op::Input | Op::Constant => vec![],
            Op::Conv(_, taps) => {
                let mut out = vec![0.0; upstream.len()];
                convolve_adjoint(self.shape, upstream, taps, &mut out);
                vec![out]
            }
            Op::Add(..) => vec![upstream.to_vec(), upstream.to_vec()],
            Op::Sub(..) => vec![upstream.to_vec(), upstream.iter().map(|g| -g).collect()],
            Op::Mul(a, b) => vec![zip(val(*b), &|g, y| g * y), zip(val(*a), &|g, x| g * x)],
            Op::Scale(_, f) => vec![upstream.iter().map(|g| g * f).collect()],
            // sub-gradient 0 at the kink
            Op::Gate(a, t) => vec![zip(val(*a), &|g, x| if x > *t { g } else { 0.0 })],
            Op::Sigmoid(_) => vec![zip(&node.value, &|g, y| g * y * (1.0 - y))],
            Op::Log(a) => vec![zip(val(*a), &|g, x| g / x)],
            // straight-through: identity
            Op::SteRound(_) => vec![upstream.to_vec()],
        }
    }

    /// Propagates `seed` (the gradient of a scalar loss with respect to
    /// `output`) back to every input node.
    pub fn backward(&self, output: NodeId, seed: &[f64]) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(Error::contract(
                "backward called on an empty tape; record a forward pass first",
            ));
        }
        if output.0 >= self.nodes.len() {
            return Err(Error::contract(format!(
                "node {} is not on this tape",
                output.0
            )));
        }
        if seed.len() != self.shape.len() {
            return Err(Error::contract(format!(
                "seed gradient has {} values, tape fields have {}",
                seed.len(),
                self.shape.len()
            )));
        }
        let mut adjoint: Vec<Option<Vec<f64>>> = vec![None; output.0 + 1];
        adjoint[output.0] = Some(seed.to_vec());
        let mut grads = Gradients::default();
        for i in (0..=output.0).rev() {
            let Some(g) = adjoint[i].take() else { continue };
            let node = &self.nodes[i];
            if matches!(node.op, Op::Input) {
                grads.inputs.insert(NodeId(i), g);
                continue;
            }
            for (operand, contrib) in node.op.operands().into_iter().zip(self.vjp(NodeId(i), &g)) {
                match &mut adjoint[operand.0] {
                    Some(acc) => acc.iter_mut().zip(&contrib).for_each(|(a, c)| *a += c),
                    slot @ None => *slot = Some(contrib),
                }
            }
        }
        for (i, n) in self.nodes[..=output.0].iter().enumerate() {
            if matches!(n.op, Op::Input) {
                grads
                    .inputs
                    .entry(NodeId(i))
                    .or_insert_with(|| vec![0.0; self.shape.len()]);
            }
        }
        Ok(grads)
    }
}

impl FieldOps for GradientTape {
    type Field = NodeId;

    fn shape(&self) -> Shape {
        self.shape
    }

    fn constant(&mut self, values: Vec<f64>) -> NodeId {
        assert_eq!(values.len(), self.shape.len(), "constant length mismatch");
        self.push(Op::Constant, values)
    }

    fn conv(&mut self, x: &NodeId, kernel: &Kernel) -> NodeId {
        let taps = kernel.taps();
        let value = convolve(self.shape, &self.nodes[x.0].value, &taps);
        self.push(Op::Conv(*x, taps), value)
    }

    fn add(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        self.binary(*a, *b, Op::Add(*a, *b), |x, y| x + y)
    }

    fn sub(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        self.binary(*a, *b, Op::Sub(*a, *b), |x, y| x - y)
    }

    fn mul(&mut self, a: &NodeId, b: &NodeId) -> NodeId {
        self.binary(*a, *b, Op::Mul(*a, *b), |x, y| x * y)
    }

    fn scale(&mut self, a: &NodeId, factor: f64) -> NodeId {
        self.unary(*a, Op::Scale(*a, factor), |x| x * factor)
    }

    fn gate(&mut self, a: &NodeId, threshold: f64) -> NodeId {
        self.unary(*a, Op::Gate(*a, threshold), |x| (x - threshold).max(0.0))
    }

    fn sigmoid(&mut self, a: &NodeId) -> NodeId {
        self.unary(*a, Op::Sigmoid(*a), sigmoid)
    }

    fn log(&mut self, a: &NodeId) -> NodeId {
        self.unary(*a, Op::Log(*a), f64::ln)
    }

    fn ste_round(&mut self, a: &NodeId) -> NodeId {
        self.unary(*a, Op::SteRound(*a), round_half_up)
    }
}
