//! Random scalar linear network codes and their global encoding vectors.
//!
//! The key node `K` sends `B_K · N` on its outgoing edges and ignores its
//! inputs. The source `S` does not decode the keys; it sends
//! `A_S · M + B_S · X_In(S)` on each outgoing edge. Every other edge carries
//! a linear combination of the symbols entering its tail.
//!
//! A global encoding vector has length `R + z` and is split as
//! `[message part | key part]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, Matrix, PrimeField};
use crate::network::{AugmentedNetwork, Edge, Network, NetworkError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("coefficient shape mismatch: {0}")]
    Shape(String),
    #[error("terminal cannot decode the message: rank deficit {deficit}")]
    NotDecodable { deficit: usize },
}

/// Where the auxiliary terminal `T*` sits in a code sampled on `G*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarInfo {
    /// node index of `T*`
    pub terminal: usize,
    /// number of edges belonging to the base network; star edges follow them
    pub base_edges: usize,
}

/// Local coefficients of a scalar linear code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub struct LinearCode {
    network: Network,
    star: Option<StarInfo>,
    rate: usize,
    keys: usize,
    field: PrimeField,
    seed: Option<u64>,
    /// `B_K`, `|Out(K)| × z`
    key_out: Matrix,
    /// `A_S`, `|Out(S)| × R`
    source_message: Matrix,
    /// `B_S`, `|Out(S)| × |In(S)|`
    source_mix: Matrix,
    /// per edge: coefficients over `In(tail)` in edge-index order; empty for
    /// edges leaving `S` or `K`
    local: Vec<Vec<u64>>,
}

#[derive(Serialize, Deserialize)]
struct CodeRepr {
    q: PrimeField,
    rate: usize,
    wiretap: usize,
    seed: Option<u64>,
    network: Network,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    star: Option<StarInfo>,
    b_k: Matrix,
    a_s: Matrix,
    b_s: Matrix,
    local: Vec<Vec<u64>>,
}

impl From<LinearCode> for CodeRepr {
    fn from(c: LinearCode) -> Self {
        CodeRepr {
            q: c.field,
            rate: c.rate,
            wiretap: c.keys,
            seed: c.seed,
            network: c.network,
            star: c.star,
            b_k: c.key_out,
            a_s: c.source_message,
            b_s: c.source_mix,
            local: c.local,
        }
    }
}

impl TryFrom<CodeRepr> for LinearCode {
    type Error = CodecError;

    fn try_from(r: CodeRepr) -> Result<Self, Self::Error> {
        let mut code = LinearCode::new(r.network, r.rate, r.wiretap, r.q, r.b_k, r.a_s, r.b_s, r.local)?;
        if let Some(star) = r.star {
            code.set_star(star)?;
        }
        code.seed = r.seed;
        Ok(code)
    }
}

impl LinearCode {
    /// Assembles a code from explicit coefficients, checking every shape and
    /// that all entries are reduced modulo `q`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        network: Network,
        rate: usize,
        keys: usize,
        field: PrimeField,
        key_out: Matrix,
        source_message: Matrix,
        source_mix: Matrix,
        local: Vec<Vec<u64>>,
    ) -> Result<Self, CodecError> {
        let (s, k) = (network.source(), network.key());
        let out_k = network.out_edges(k).len();
        let out_s = network.out_edges(s).len();
        let in_s = network.in_edges(s).len();
        let expect = |name: &str, m: &Matrix, rows: usize, cols: usize| {
            if m.rows() != rows || m.cols() != cols {
                Err(CodecError::Shape(format!(
                    "{name} is {}x{}, expected {rows}x{cols}",
                    m.rows(),
                    m.cols()
                )))
            } else {
                field.check(m).map_err(CodecError::from)
            }
        };
        expect("b_k", &key_out, out_k, keys)?;
        expect("a_s", &source_message, out_s, rate)?;
        expect("b_s", &source_mix, out_s, in_s)?;
        if local.len() != network.edge_count() {
            return Err(CodecError::Shape(format!(
                "{} local coefficient vectors for {} edges",
                local.len(),
                network.edge_count()
            )));
        }
        for (e, coeffs) in local.iter().enumerate() {
            let tail = network.edge(e).tail;
            let want = if tail == s || tail == k {
                0
            } else {
                network.in_edges(tail).len()
            };
            if coeffs.len() != want {
                return Err(CodecError::Shape(format!(
                    "edge {e} has {} local coefficients, expected {want}",
                    coeffs.len()
                )));
            }
            if let Some(&bad) = coeffs.iter().find(|&&c| c >= field.q()) {
                return Err(CodecError::Shape(format!(
                    "edge {e} coefficient {bad} is not reduced modulo {}",
                    field.q()
                )));
            }
        }
        Ok(Self {
            network,
            star: None,
            rate,
            keys,
            field,
            seed: None,
            key_out,
            source_message,
            source_mix,
            local,
        })
    }

    fn set_star(&mut self, star: StarInfo) -> Result<(), CodecError> {
        let net = &self.network;
        let bad = |msg: &str| Err(CodecError::Shape(format!("star terminal: {msg}")));
        if star.terminal >= net.node_count() || star.base_edges > net.edge_count() {
            return bad("out of range");
        }
        if star.terminal + 1 != net.node_count() {
            return bad("must be the last node");
        }
        let expected = Edge {
            tail: net.source(),
            head: star.terminal,
        };
        for (i, e) in net.edges().iter().enumerate() {
            let is_star = e.head == star.terminal || e.tail == star.terminal;
            if (i >= star.base_edges) != is_star || (is_star && *e != expected) {
                return bad("star edges must be the trailing S -> T* edges");
            }
        }
        if net.edge_count() - star.base_edges != self.rate + self.keys {
            return bad("needs exactly R + z edges");
        }
        self.star = Some(star);
        Ok(())
    }

    /// Draws every coefficient i.i.d. uniform from `F_q` with a ChaCha8
    /// stream seeded by `seed`, in the order `B_K`, `A_S`, `B_S`, then the
    /// local vectors by edge index.
    pub fn sample(
        network: &Network,
        rate: usize,
        keys: usize,
        field: PrimeField,
        seed: u64,
    ) -> LinearCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, k) = (network.source(), network.key());
        let out_k = network.out_edges(k).len();
        let out_s = network.out_edges(s).len();
        let in_s = network.in_edges(s).len();
        let key_out = field.random_matrix(out_k, keys, &mut rng);
        let source_message = field.random_matrix(out_s, rate, &mut rng);
        let source_mix = field.random_matrix(out_s, in_s, &mut rng);
        let local = network
            .edges()
            .iter()
            .map(|e| {
                if e.tail == s || e.tail == k {
                    Vec::new()
                } else {
                    let n = network.in_edges(e.tail).len();
                    (0..n).map(|_| field.random_element(&mut rng)).collect()
                }
            })
            .collect();
        let mut code = LinearCode::new(
            network.clone(),
            rate,
            keys,
            field,
            key_out,
            source_message,
            source_mix,
            local,
        )
        .expect("sampled shapes match the network");
        code.seed = Some(seed);
        code
    }

    /// Samples a code on `G*`. Restricting it with [`LinearCode::restrict_to_base`]
    /// gives the code used on the original network.
    pub fn sample_star(aug: &AugmentedNetwork, rate: usize, keys: usize, field: PrimeField, seed: u64) -> LinearCode {
        let mut code = LinearCode::sample(aug.network(), rate, keys, field, seed);
        code.star = Some(StarInfo {
            terminal: aug.star_terminal(),
            base_edges: aug.base().edge_count(),
        });
        code
    }

    /// Drops `T*`, its edges and their rows of `A_S`/`B_S`; every remaining
    /// coefficient is kept as is. A code without a star terminal is returned
    /// unchanged.
    pub fn restrict_to_base(&self) -> Result<LinearCode, CodecError> {
        let Some(star) = self.star else {
            return Ok(self.clone());
        };
        let net = &self.network;
        let base = Network::new(
            net.names()[..star.terminal].to_vec(),
            net.edges()[..star.base_edges].to_vec(),
            net.source(),
            net.key(),
            net.terminal(),
        )?;
        // Out(S) is ordered by edge index, so star rows come last.
        let keep: Vec<usize> = (0..base.out_edges(base.source()).len()).collect();
        let mut code = LinearCode::new(
            base,
            self.rate,
            self.keys,
            self.field,
            self.key_out.clone(),
            self.source_message.select_rows(&keep),
            self.source_mix.select_rows(&keep),
            self.local[..star.base_edges].to_vec(),
        )?;
        code.seed = self.seed;
        Ok(code)
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn star(&self) -> Option<StarInfo> {
        self.star
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    /// Key dimension `|N|`, equal to the wiretap budget `z`.
    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn key_out(&self) -> &Matrix {
        &self.key_out
    }

    pub fn source_message(&self) -> &Matrix {
        &self.source_message
    }

    pub fn source_mix(&self) -> &Matrix {
        &self.source_mix
    }

    pub fn local(&self, edge: usize) -> &[u64] {
        &self.local[edge]
    }

    /// Number of edges of the original (non-augmented) network.
    pub fn base_edge_count(&self) -> usize {
        self.star.map_or(self.network.edge_count(), |s| s.base_edges)
    }

    /// Global encoding vectors of every edge, in one topological pass.
    pub fn propagate(&self) -> GlobalEncoding {
        let net = &self.network;
        let f = &self.field;
        let width = self.rate + self.keys;
        let mut vectors = Matrix::zeros(net.edge_count(), width);
        let (s, k) = (net.source(), net.key());
        for &v in net.topo_order() {
            let inputs = net.in_edges(v);
            for (i, e) in net.out_edges(v).into_iter().enumerate() {
                let mut g = vec![0u64; width];
                let coeffs: &[u64] = if v == k {
                    g[self.rate..].copy_from_slice(self.key_out.row(i));
                    &[]
                } else if v == s {
                    g[..self.rate].copy_from_slice(self.source_message.row(i));
                    self.source_mix.row(i)
                } else {
                    &self.local[e]
                };
                for (&c, &input) in coeffs.iter().zip(&inputs) {
                    if c == 0 {
                        continue;
                    }
                    for (j, x) in g.iter_mut().enumerate() {
                        *x = f.add(*x, f.mul(c, vectors.get(input, j)));
                    }
                }
                for (j, x) in g.into_iter().enumerate() {
                    vectors.set(e, j, x);
                }
            }
        }
        GlobalEncoding {
            field: self.field,
            rate: self.rate,
            keys: self.keys,
            vectors,
        }
    }

    /// Runs the code on concrete symbols and returns the symbol on every edge.
    pub fn transmit(&self, message: &[u64], keys: &[u64]) -> Vec<u64> {
        assert_eq!(message.len(), self.rate);
        assert_eq!(keys.len(), self.keys);
        let net = &self.network;
        let f = &self.field;
        let mut symbols = vec![0u64; net.edge_count()];
        let (s, k) = (net.source(), net.key());
        let dot = |a: &[u64], b: &[u64]| a.iter().zip(b).fold(0, |acc, (&x, &y)| f.add(acc, f.mul(x, y)));
        for &v in net.topo_order() {
            let inputs: Vec<u64> = net.in_edges(v).iter().map(|&e| symbols[e]).collect();
            for (i, e) in net.out_edges(v).into_iter().enumerate() {
                symbols[e] = if v == k {
                    dot(self.key_out.row(i), keys)
                } else if v == s {
                    f.add(
                        dot(self.source_message.row(i), message),
                        dot(self.source_mix.row(i), &inputs),
                    )
                } else {
                    dot(&self.local[e], &inputs)
                };
            }
        }
        symbols
    }
}

/// Per-edge global encoding vectors, one row per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalEncoding {
    field: PrimeField,
    rate: usize,
    keys: usize,
    vectors: Matrix,
}

impl GlobalEncoding {
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn keys(&self) -> usize {
        self.keys
    }

    pub fn edge_count(&self) -> usize {
        self.vectors.rows()
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }

    pub fn vector(&self, edge: usize) -> &[u64] {
        self.vectors.row(edge)
    }

    /// `a_e`, acting on the message.
    pub fn message_part(&self, edge: usize) -> &[u64] {
        &self.vectors.row(edge)[..self.rate]
    }

    /// `b_e`, acting on the keys.
    pub fn key_part(&self, edge: usize) -> &[u64] {
        &self.vectors.row(edge)[self.rate..]
    }

    /// Stacked vectors of `edges`, in the given order.
    pub fn stack(&self, edges: &[usize]) -> Matrix {
        self.vectors.select_rows(edges)
    }

    /// `[I_R | 0]`: the functionals a decoder for `M` must produce.
    fn message_target(&self) -> Matrix {
        Matrix::identity(self.rate).hstack(&Matrix::zeros(self.rate, self.keys)).expect("same rows")
    }

    /// Restriction to the first `edges` edges, e.g. the base edges of `G*`.
    pub fn truncate(&self, edges: usize) -> GlobalEncoding {
        let keep: Vec<usize> = (0..edges).collect();
        GlobalEncoding {
            vectors: self.vectors.select_rows(&keep),
            ..self.clone()
        }
    }
}

/// True iff `M` is a linear function of the symbols entering the terminal.
pub fn decodable(enc: &GlobalEncoding, net: &Network) -> bool {
    let received = enc.stack(&net.in_edges(net.terminal()));
    enc.field
        .rowspace_contains(&received, &enc.message_target())
        .expect("widths agree")
}

/// A matrix `D` with `D · X_In(T) = M`, i.e. `D · stack(In(T)) = [I_R | 0]`.
pub fn decode_matrix(enc: &GlobalEncoding, net: &Network) -> Result<Matrix, CodecError> {
    let received = enc.stack(&net.in_edges(net.terminal()));
    let target = enc.message_target();
    match enc.field.solve_left(&received, &target)? {
        Some(d) => Ok(d),
        None => {
            let f = enc.field;
            let deficit = f.rank(&received.vstack(&target)?) - f.rank(&received);
            Err(CodecError::NotDecodable { deficit })
        }
    }
}

/// Both `T` and `T*` can recover all of `(M, N)`.
pub fn star_feasible(enc: &GlobalEncoding, net: &Network, star_terminal: usize) -> bool {
    let width = enc.rate + enc.keys;
    [net.terminal(), star_terminal]
        .into_iter()
        .all(|t| enc.field.rank(&enc.stack(&net.in_edges(t))) == width)
}

pub fn star_feasible_on(enc: &GlobalEncoding, aug: &AugmentedNetwork) -> bool {
    star_feasible(enc, aug.network(), aug.star_terminal())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn f(q: u64) -> PrimeField {
        PrimeField::new(q).unwrap()
    }

    fn mat(cols: usize, rows: &[&[u64]]) -> Matrix {
        Matrix::from_rows(cols, rows.iter().copied()).unwrap()
    }

    /// K→S (e0), S→a (e1), a→T (e2), S→T (e3) with hand-picked coefficients.
    fn fixture() -> LinearCode {
        let net = Network::parse("edge K S\nedge S a\nedge a T\nedge S T\nsource S\nkey K\nterminal T")
            .unwrap();
        LinearCode::new(
            net,
            1,
            1,
            f(5),
            mat(1, &[&[2]]),
            mat(1, &[&[1], &[3]]),
            mat(1, &[&[4], &[1]]),
            vec![vec![], vec![], vec![3], vec![]],
        )
        .unwrap()
    }

    #[test]
    fn hand_propagation_fixture() {
        // g0 = [0|2]
        // g1 = [1|0] + 4·g0 = [1|3]
        // g3 = [3|0] + 1·g0 = [3|2]
        // g2 = 3·g1        = [3|4]
        let enc = fixture().propagate();
        assert_eq!(enc.vector(0), &[0, 2]);
        assert_eq!(enc.vector(1), &[1, 3]);
        assert_eq!(enc.vector(2), &[3, 4]);
        assert_eq!(enc.vector(3), &[3, 2]);
        let net = fixture().network().clone();
        assert!(decodable(&enc, &net));
        // 3·[3,4] + 4·[3,2] = [21, 20] = [1, 0] mod 5
        assert_eq!(decode_matrix(&enc, &net).unwrap(), mat(2, &[&[3, 4]]));
    }

    #[test]
    fn key_edge_has_zero_message_part() {
        let net = Network::parse("edge K S\nedge S T\nsource S\nkey K\nterminal T").unwrap();
        let code = LinearCode::sample(&net, 1, 1, f(101), 7);
        let enc = code.propagate();
        assert_eq!(enc.message_part(0), &[0]);
        assert_eq!(enc.key_part(0), code.key_out().row(0));
    }

    #[test]
    fn zero_keys_gives_empty_key_matrix() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let code = LinearCode::sample(&net, 2, 0, f(11), 3);
        assert_eq!(code.key_out().cols(), 0);
        let enc = code.propagate();
        for e in 0..net.edge_count() {
            assert!(enc.key_part(e).is_empty());
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let a = LinearCode::sample(&net, 1, 2, f(101), 99);
        let b = LinearCode::sample(&net, 1, 2, f(101), 99);
        assert_eq!(a, b);
        assert_ne!(a, LinearCode::sample(&net, 1, 2, f(101), 100));
    }

    #[test]
    fn coefficients_are_uniform() {
        // chi-square over all coefficients of 10^4 codes, 10 dof, 99% quantile 23.209
        let net = Network::parse("edge K a\nedge a S\nedge S b\nedge b T\nsource S\nkey K\nterminal T")
            .unwrap();
        let mut hist = [0u64; 11];
        for seed in 0..10_000u64 {
            let code = LinearCode::sample(&net, 1, 1, f(11), seed);
            let mut all: Vec<u64> = Vec::new();
            all.extend(code.key_out().entries());
            all.extend(code.source_message().entries());
            all.extend(code.source_mix().entries());
            for e in 0..net.edge_count() {
                all.extend(code.local(e));
            }
            for c in all {
                hist[c as usize] += 1;
            }
        }
        let total: u64 = hist.iter().sum();
        let expected = total as f64 / 11.0;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 23.209, "chi2 = {chi2}");
    }

    #[test]
    fn decodability_examples() {
        let net = Network::parse("edge K S\nedge S T\nsource S\nkey K\nterminal T").unwrap();
        let plain = LinearCode::new(
            net.clone(),
            1,
            0,
            f(7),
            mat(0, &[&[]]),
            mat(1, &[&[1]]),
            mat(1, &[&[0]]),
            vec![vec![], vec![]],
        )
        .unwrap();
        let enc = plain.propagate();
        assert_eq!(enc.vector(1), &[1]);
        assert!(decodable(&enc, &net));
        assert_eq!(decode_matrix(&enc, &net).unwrap(), mat(1, &[&[1]]));

        // the single symbol reaching T is M + N
        let masked = LinearCode::new(
            net.clone(),
            1,
            1,
            f(7),
            mat(1, &[&[1]]),
            mat(1, &[&[1]]),
            mat(1, &[&[1]]),
            vec![vec![], vec![]],
        )
        .unwrap();
        let enc = masked.propagate();
        assert_eq!(enc.vector(1), &[1, 1]);
        assert!(!decodable(&enc, &net));
        assert_eq!(
            decode_matrix(&enc, &net).unwrap_err(),
            CodecError::NotDecodable { deficit: 1 }
        );
    }

    #[test]
    fn two_edge_decoder_at_q2() {
        // In(T) carries [1|1] (e1: S→T) and [0|1] (e2: K→T); D = [1 1].
        let net = Network::parse("edge K S\nedge S T\nedge K T\nsource S\nkey K\nterminal T").unwrap();
        let code = LinearCode::new(
            net.clone(),
            1,
            1,
            f(2),
            mat(1, &[&[1], &[1]]),
            mat(1, &[&[1]]),
            mat(1, &[&[1]]),
            vec![vec![], vec![], vec![]],
        )
        .unwrap();
        let enc = code.propagate();
        assert_eq!(enc.vector(1), &[1, 1]);
        assert_eq!(enc.vector(2), &[0, 1]);
        assert_eq!(decode_matrix(&enc, &net).unwrap(), mat(2, &[&[1, 1]]));
    }

    #[test]
    fn star_feasibility_examples() {
        // T and T* each see an identity basis of F_q^2.
        let net = Network::parse("edge K S\nedge S T\nedge K T\nsource S\nkey K\nterminal T").unwrap();
        let aug = net.augment_star(1, 1).unwrap();
        let g = aug.network();
        let out_s = g.out_edges(g.source()).len();
        assert_eq!(out_s, 3);
        let code = LinearCode::new(
            g.clone(),
            1,
            1,
            f(3),
            mat(1, &[&[1], &[1]]),
            mat(1, &[&[1], &[1], &[0]]),
            mat(1, &[&[2], &[2], &[1]]),
            vec![vec![]; g.edge_count()],
        )
        .unwrap();
        let enc = code.propagate();
        // S→T: [1|2], K→T: [0|1], star edges: [1|2], [0|1]
        assert_eq!(enc.vector(1), &[1, 2]);
        assert_eq!(enc.vector(4), &[0, 1]);
        assert!(star_feasible_on(&enc, &aug));

        // both star edges carry [0|1]: rank 1 at T*
        let deficient = LinearCode::new(
            g.clone(),
            1,
            1,
            f(3),
            mat(1, &[&[1], &[1]]),
            mat(1, &[&[1], &[0], &[0]]),
            mat(1, &[&[2], &[1], &[1]]),
            vec![vec![]; g.edge_count()],
        )
        .unwrap();
        assert!(!star_feasible_on(&deficient.propagate(), &aug));
    }

    #[test]
    fn shape_validation() {
        let code = fixture();
        let net = code.network().clone();
        let err = LinearCode::new(
            net.clone(),
            1,
            1,
            f(5),
            mat(2, &[&[2, 1]]),
            code.source_message().clone(),
            code.source_mix().clone(),
            vec![vec![], vec![], vec![3], vec![]],
        );
        assert!(matches!(err, Err(CodecError::Shape(_))));
        let err = LinearCode::new(
            net,
            1,
            1,
            f(5),
            mat(1, &[&[7]]),
            code.source_message().clone(),
            code.source_mix().clone(),
            vec![vec![], vec![], vec![3], vec![]],
        );
        assert!(matches!(err, Err(CodecError::Field(FieldError::Unreduced { .. }))));
    }

    #[test]
    fn json_replay_is_exact() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let aug = net.augment_star(1, 1).unwrap();
        let code = LinearCode::sample_star(&aug, 1, 1, f(101), 5);
        let json = serde_json::to_string(&code).unwrap();
        let back: LinearCode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, code);
        assert_eq!(back.propagate(), code.propagate());
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }

    #[test]
    fn restriction_keeps_base_coefficients() {
        let net = Network::parse(include_str!("../../../docs/examples/butterfly.net")).unwrap();
        let aug = net.augment_star(2, 1).unwrap();
        let star = LinearCode::sample_star(&aug, 2, 1, f(101), 11);
        let base = star.restrict_to_base().unwrap();
        assert_eq!(base.network(), &net);
        assert_eq!(base.propagate(), star.propagate().truncate(net.edge_count()));
    }

    fn unit(i: usize, n: usize) -> Vec<u64> {
        (0..n).map(|j| u64::from(i == j)).collect()
    }

    proptest! {
        #[test]
        fn transmit_agrees_with_global_vectors(seed in any::<u64>(), nodes in 3usize..8, edges in 0usize..12,
                                                r in 1usize..3, z in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let net = Network::random(nodes, edges, &mut rng);
            let field = f(13);
            let code = LinearCode::sample(&net, r, z, field, seed);
            let enc = code.propagate();
            let m: Vec<u64> = (0..r).map(|_| rng.gen_range(0..13)).collect();
            let n: Vec<u64> = (0..z).map(|_| rng.gen_range(0..13)).collect();
            let x = code.transmit(&m, &n);
            let input: Vec<u64> = m.iter().chain(&n).copied().collect();
            for e in 0..net.edge_count() {
                let expect = enc.vector(e).iter().zip(&input)
                    .fold(0, |acc, (&g, &v)| field.add(acc, field.mul(g, v)));
                prop_assert_eq!(x[e], expect);
            }
            // linearity: X(u + v) = X(u) + X(v)
            let m2: Vec<u64> = (0..r).map(|_| rng.gen_range(0..13)).collect();
            let n2: Vec<u64> = (0..z).map(|_| rng.gen_range(0..13)).collect();
            let sum_m: Vec<u64> = m.iter().zip(&m2).map(|(&a, &b)| field.add(a, b)).collect();
            let sum_n: Vec<u64> = n.iter().zip(&n2).map(|(&a, &b)| field.add(a, b)).collect();
            let lhs = code.transmit(&sum_m, &sum_n);
            let rhs: Vec<u64> = x.iter().zip(code.transmit(&m2, &n2)).map(|(&a, b)| field.add(a, b)).collect();
            prop_assert_eq!(lhs, rhs);
            // unit inputs recover the global vectors column by column
            for i in 0..r + z {
                let u = unit(i, r + z);
                let col = code.transmit(&u[..r], &u[r..]);
                for e in 0..net.edge_count() {
                    prop_assert_eq!(col[e], enc.vector(e)[i]);
                }
            }
        }

        #[test]
        fn edges_outside_source_reach_carry_no_message(seed in any::<u64>(), nodes in 3usize..8, edges in 0usize..12) {
            let net = Network::random(nodes, edges, &mut ChaCha8Rng::seed_from_u64(seed));
            let code = LinearCode::sample(&net, 2, 1, f(7), seed);
            let enc = code.propagate();
            // nodes reachable from S without passing through K
            let mut reach = vec![false; net.node_count()];
            reach[net.source()] = true;
            for &v in net.topo_order() {
                if reach[v] && v != net.key() {
                    for e in net.out_edges(v) {
                        reach[net.edge(e).head] = true;
                    }
                }
            }
            for e in 0..net.edge_count() {
                let tail = net.edge(e).tail;
                if !reach[tail] || tail == net.key() {
                    prop_assert!(enc.message_part(e).iter().all(|&x| x == 0));
                }
            }
        }

        #[test]
        fn star_feasible_implies_decodable(seed in any::<u64>(), nodes in 3usize..8, edges in 1usize..12,
                                           r in 1usize..3, z in 0usize..3, q in prop::sample::select(vec![2u64, 3, 5, 101])) {
            let net = Network::random(nodes, edges, &mut ChaCha8Rng::seed_from_u64(seed));
            let aug = net.augment_star(r, z).unwrap();
            let code = LinearCode::sample_star(&aug, r, z, f(q), seed);
            let enc = code.propagate();
            let base = code.restrict_to_base().unwrap();
            let base_enc = base.propagate();
            prop_assert_eq!(&base_enc, &enc.truncate(net.edge_count()));
            if star_feasible_on(&enc, &aug) {
                prop_assert!(decodable(&base_enc, &net));
            }
            // T* cannot recover N unless the keys reaching S have rank z
            let in_s = net.in_edges(net.source());
            let keys_at_s = base_enc.stack(&in_s).column_block(r, r + z);
            if f(q).rank(&keys_at_s) < z {
                prop_assert!(!star_feasible_on(&enc, &aug));
            }
            if decodable(&base_enc, &net) {
                let d = decode_matrix(&base_enc, &net).unwrap();
                let stacked = base_enc.stack(&net.in_edges(net.terminal()));
                prop_assert_eq!(f(q).mat_mul(&d, &stacked).unwrap(), base_enc.message_target());
            }
        }
    }
}
