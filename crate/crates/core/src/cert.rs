//! Certificate trees recording how an answer was obtained.

use serde::Serialize;

/// One derivation step with the steps it relies on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub rule: String,
    pub claim: String,
    /// Inputs taken on trust rather than computed.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Certificate>,
}

impl Certificate {
    pub fn new(rule: &str, claim: impl Into<String>) -> Certificate {
        Certificate {
            rule: rule.to_string(),
            claim: claim.into(),
            assumptions: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn child(mut self, c: Certificate) -> Certificate {
        self.children.push(c);
        self
    }

    pub fn children(mut self, cs: impl IntoIterator<Item = Certificate>) -> Certificate {
        self.children.extend(cs);
        self
    }

    pub fn assume(mut self, a: impl Into<String>) -> Certificate {
        self.assumptions.push(a.into());
        self
    }

    /// Every assumption in the tree, depth first, without duplicates.
    pub fn all_assumptions(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<String>) {
        for a in &self.assumptions {
            if !out.contains(a) {
                out.push(a.clone());
            }
        }
        for c in &self.children {
            c.collect(out);
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Certificate::size).sum::<usize>()
    }
}
