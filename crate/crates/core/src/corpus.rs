//! Shipped `(spec, certificate)` instances.

use crate::herbrand::HerbrandCertificate;
use crate::spec_lang::{parse_document, Delta2Spec, Document, TermExpr};

pub struct Instance {
    pub name: &'static str,
    pub source: &'static str,
}

pub const INSTANCES: [Instance; 9] = [
    Instance { name: "shift", source: include_str!("../corpus/shift.d2") },
    Instance { name: "empty", source: include_str!("../corpus/empty.d2") },
    Instance { name: "positive", source: include_str!("../corpus/positive.d2") },
    Instance { name: "nonsquare", source: include_str!("../corpus/nonsquare.d2") },
    Instance { name: "even", source: include_str!("../corpus/even.d2") },
    Instance { name: "late_refutation", source: include_str!("../corpus/late_refutation.d2") },
    Instance { name: "two_stage", source: include_str!("../corpus/two_stage.d2") },
    Instance { name: "even_padded", source: include_str!("../corpus/even_padded.d2") },
    Instance { name: "dce", source: include_str!("../corpus/dce.d2") },
];

pub struct Loaded {
    pub name: &'static str,
    pub spec: Delta2Spec,
    pub certificate: HerbrandCertificate,
    pub sigma2: Option<Vec<TermExpr>>,
    pub document: Document,
}

impl Instance {
    /// # Panics
    /// If the embedded file does not parse, which the tests rule out.
    pub fn load(&self) -> Loaded {
        let document = parse_document(self.source).unwrap_or_else(|e| panic!("{}: {e}", self.name));
        let spec = Delta2Spec::from_document(&document).unwrap_or_else(|e| panic!("{}: {e}", self.name));
        let certificate = document.herbrand.clone().unwrap_or_else(|| panic!("{}: no certificate", self.name));
        Loaded { name: self.name, spec, certificate, sigma2: document.sigma2.clone(), document }
    }
}

pub fn load_all() -> Vec<Loaded> {
    INSTANCES.iter().map(Instance::load).collect()
}

pub fn find(name: &str) -> Option<&'static Instance> {
    INSTANCES.iter().find(|i| i.name == name)
}
