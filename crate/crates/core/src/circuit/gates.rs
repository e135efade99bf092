use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Every gate kind known to any gate set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Cx,
    H,
    Rx,
    Ry,
    Rz,
    Id,
    Cz,
    Rzz,
    Sx,
    X,
    Swap,
    Crx,
    Cry,
}

/// Part a qubit plays inside a placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Single,
    Control,
    Target,
    Shared,
}

impl GateKind {
    pub const ALL: [GateKind; 13] = [
        GateKind::Cx,
        GateKind::H,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Id,
        GateKind::Cz,
        GateKind::Rzz,
        GateKind::Sx,
        GateKind::X,
        GateKind::Swap,
        GateKind::Crx,
        GateKind::Cry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Cx => "cx",
            GateKind::H => "h",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Id => "id",
            GateKind::Cz => "cz",
            GateKind::Rzz => "rzz",
            GateKind::Sx => "sx",
            GateKind::X => "x",
            GateKind::Swap => "swap",
            GateKind::Crx => "crx",
            GateKind::Cry => "cry",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Cx
            | GateKind::Cz
            | GateKind::Rzz
            | GateKind::Swap
            | GateKind::Crx
            | GateKind::Cry => 2,
            _ => 1,
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::Rzz
            | GateKind::Crx
            | GateKind::Cry => 1,
            _ => 0,
        }
    }

    pub fn is_parameterized(self) -> bool {
        self.num_params() == 1
    }

    /// Two-qubit gates whose qubit order does not matter.
    pub fn symmetric(self) -> bool {
        matches!(self, GateKind::Cz | GateKind::Rzz | GateKind::Swap)
    }

    /// Roles this kind places on its qubits, in qubit-list order.
    pub fn roles(self) -> &'static [Role] {
        match (self.arity(), self.symmetric()) {
            (1, _) => &[Role::Single],
            (_, true) => &[Role::Shared],
            _ => &[Role::Control, Role::Target],
        }
    }

    /// Vocabulary tokens this kind contributes.
    pub fn role_tokens(self) -> Vec<Token> {
        self.roles()
            .iter()
            .map(|&role| Token::Gate(self, role))
            .collect()
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown gate '{s}'"))
    }
}

/// One vocabulary entry: the no-op padding symbol or a role of a gate kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    NoOp,
    Gate(GateKind, Role),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::NoOp => f.write_str("noop"),
            Token::Gate(kind, Role::Control) => write!(f, "{kind}_c"),
            Token::Gate(kind, Role::Target) => write!(f, "{kind}_t"),
            Token::Gate(kind, _) => write!(f, "{kind}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSetId {
    Gs1,
    Gs2,
    Ml,
}

impl GateSetId {
    pub fn name(self) -> &'static str {
        match self {
            GateSetId::Gs1 => "gs1",
            GateSetId::Gs2 => "gs2",
            GateSetId::Ml => "ml",
        }
    }
}

impl fmt::Display for GateSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateSetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gs1" => Ok(GateSetId::Gs1),
            "gs2" => Ok(GateSetId::Gs2),
            "ml" => Ok(GateSetId::Ml),
            _ => Err(format!("unknown gate set '{s}' (expected gs1, gs2 or ml)")),
        }
    }
}

/// A hardware alphabet: the allowed kinds and the token vocabulary derived from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateSet {
    id: GateSetId,
    kinds: Vec<GateKind>,
    vocabulary: Vec<Token>,
}

impl GateSet {
    pub fn new(id: GateSetId) -> Self {
        use GateKind::*;
        let kinds = match id {
            GateSetId::Gs1 => vec![Cx, H, Rx, Ry, Rz, Id],
            GateSetId::Gs2 => vec![Cz, Id, Rx, Rz, Rzz, Sx, X],
            GateSetId::Ml => vec![Cx, H, Rx, Ry, Swap, Crx, Cry],
        };
        let vocabulary = std::iter::once(Token::NoOp)
            .chain(kinds.iter().flat_map(|k| k.role_tokens()))
            .collect();
        GateSet {
            id,
            kinds,
            vocabulary,
        }
    }

    pub fn gs1() -> Self {
        Self::new(GateSetId::Gs1)
    }

    pub fn gs2() -> Self {
        Self::new(GateSetId::Gs2)
    }

    pub fn ml() -> Self {
        Self::new(GateSetId::Ml)
    }

    pub fn id(&self) -> GateSetId {
        self.id
    }

    pub fn kinds(&self) -> &[GateKind] {
        &self.kinds
    }

    pub fn contains(&self, kind: GateKind) -> bool {
        self.kinds.contains(&kind)
    }

    /// Tokens in embedding order; index 0 is always [`Token::NoOp`].
    pub fn vocabulary(&self) -> &[Token] {
        &self.vocabulary
    }

    pub fn token_index(&self, token: Token) -> Option<usize> {
        self.vocabulary.iter().position(|&t| t == token)
    }

    pub fn max_arity(&self) -> usize {
        self.kinds.iter().map(|k| k.arity()).max().unwrap_or(1)
    }
}
