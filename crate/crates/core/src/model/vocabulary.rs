//! The unified environmental vocabulary: canonical properties and units,
//! category-annotated classes and influence relations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Iri, ModelError, Namespace, Term, Triple};

/// Top-level category every vocabulary class belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OntologyCategory {
    Object,
    State,
    Process,
    Event,
}

impl OntologyCategory {
    pub const ALL: [OntologyCategory; 4] =
        [OntologyCategory::Object, OntologyCategory::State, OntologyCategory::Process, OntologyCategory::Event];

    pub fn name(self) -> &'static str {
        match self {
            OntologyCategory::Object => "Object",
            OntologyCategory::State => "State",
            OntologyCategory::Process => "Process",
            OntologyCategory::Event => "Event",
        }
    }
}

impl fmt::Display for OntologyCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct Vocabulary {
    ns: Namespace,
    properties: BTreeMap<Iri, Iri>,
    units: BTreeMap<Iri, Iri>,
    classes: BTreeMap<Iri, OntologyCategory>,
    subclass_of: Vec<(Iri, Iri)>,
    influenced_by: Vec<(Iri, Iri)>,
}

impl Vocabulary {
    pub fn empty(ns: Namespace) -> Self {
        Vocabulary {
            ns,
            properties: BTreeMap::new(),
            units: BTreeMap::new(),
            classes: BTreeMap::new(),
            subclass_of: Vec::new(),
            influenced_by: Vec::new(),
        }
    }

    /// The shipped vocabulary.
    pub fn standard(ns: Namespace) -> Self {
        let mut v = Vocabulary::empty(ns);
        for (prop, unit) in [
            ("soilMoisture", "percentVolumetric"),
            ("precipitation", "millimetre"),
            ("airTemperature", "degreeCelsius"),
            ("relativeHumidity", "percent"),
            ("windSpeed", "metrePerSecond"),
        ] {
            let (p, u) = (v.ns.ex(prop), v.ns.ex(unit));
            v.add_property(p, u).expect("standard vocabulary is consistent");
        }
        for cat in OntologyCategory::ALL {
            let c = v.ns.ex(cat.name());
            v.annotate_class(c, cat).expect("standard vocabulary is consistent");
        }
        for (class, cat) in [
            ("Sensor", OntologyCategory::Object),
            ("ObservationEvent", OntologyCategory::Event),
            ("DroughtProcess", OntologyCategory::Process),
            ("DryCondition", OntologyCategory::State),
        ] {
            let c = v.ns.ex(class);
            v.annotate_class(c.clone(), cat).expect("standard vocabulary is consistent");
            v.subclass_of.push((c, v.ns.ex(cat.name())));
        }
        let (sm, t) = (v.ns.ex("soilMoisture"), v.ns.ex("airTemperature"));
        v.influenced_by.push((sm, t));
        v
    }

    pub fn namespace(&self) -> &Namespace {
        &self.ns
    }

    pub fn add_property(&mut self, property: Iri, unit: Iri) -> Result<(), ModelError> {
        if self.properties.contains_key(&property) {
            return Err(ModelError::DuplicateProperty(property.to_string()));
        }
        if let Some(owner) = self.units.get(&unit) {
            return Err(ModelError::DuplicateUnit(unit.to_string(), owner.to_string()));
        }
        self.units.insert(unit.clone(), property.clone());
        self.properties.insert(property, unit);
        Ok(())
    }

    /// Registers the category of a class; a class may be annotated once.
    pub fn annotate_class(&mut self, class: Iri, category: OntologyCategory) -> Result<(), ModelError> {
        if let Some(existing) = self.classes.get(&class) {
            return Err(ModelError::CategoryConflict { class: class.to_string(), existing: *existing, requested: category });
        }
        self.classes.insert(class, category);
        Ok(())
    }

    pub fn add_influence(&mut self, property: Iri, influenced_by: Iri) -> Result<(), ModelError> {
        for p in [&property, &influenced_by] {
            if !self.properties.contains_key(p) {
                return Err(ModelError::UnknownProperty(p.to_string()));
            }
        }
        self.influenced_by.push((property, influenced_by));
        Ok(())
    }

    pub fn canonical_unit(&self, property: &Iri) -> Option<&Iri> {
        self.properties.get(property)
    }

    pub fn is_property(&self, iri: &Iri) -> bool {
        self.properties.contains_key(iri)
    }

    pub fn is_canonical_unit(&self, iri: &Iri) -> bool {
        self.units.contains_key(iri)
    }

    pub fn properties(&self) -> impl Iterator<Item = (&Iri, &Iri)> {
        self.properties.iter()
    }

    pub fn category(&self, class: &Iri) -> Option<OntologyCategory> {
        self.classes.get(class).copied()
    }

    pub fn influences(&self) -> &[(Iri, Iri)] {
        &self.influenced_by
    }

    /// Ontology facts: class categories, subclass links, canonical units and
    /// influence relations.
    pub fn to_triples(&self) -> Vec<Triple> {
        let ns = &self.ns;
        let (rdf_type, category, sub_class) = (ns.rdf("type"), ns.ex("category"), ns.rdfs("subClassOf"));
        let (prop_class, unit_pred, infl) = (ns.ex("ObservableProperty"), ns.ex("canonicalUnit"), ns.ex("influencedBy"));
        let t = |s: &Iri, p: &Iri, o: &Iri| Triple::new(Term::Iri(s.clone()), p.clone(), Term::Iri(o.clone())).expect("IRI subject");
        let mut out = Vec::new();
        for (class, cat) in &self.classes {
            out.push(t(class, &rdf_type, &ns.rdfs("Class")));
            out.push(t(class, &category, &ns.ex(cat.name())));
        }
        for (sub, sup) in &self.subclass_of {
            out.push(t(sub, &sub_class, sup));
        }
        for (prop, unit) in &self.properties {
            out.push(t(prop, &rdf_type, &prop_class));
            out.push(t(prop, &unit_pred, unit));
        }
        for (a, b) in &self.influenced_by {
            out.push(t(a, &infl, b));
        }
        out
    }
}
