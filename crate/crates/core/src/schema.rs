//! Vocabulary layer: object types, properties with finite value domains, and
//! the registry that maps object names to state variables.
//!
//! The object universe is open. Fluents may mention objects that were never
//! declared; the registry creates them on first sight, inferring the type
//! from the property they were mentioned with.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("no type declares a property named `{0}`")]
    UnknownProperty(String),
    #[error("duplicate type `{0}`")]
    DuplicateType(String),
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("object `{object}` (type `{ty}`) has no property `{property}`")]
    NoSuchProperty {
        object: String,
        ty: String,
        property: String,
    },
    #[error("property `{0}` has an empty domain")]
    EmptyDomain(String),
    #[error("schema file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Grid coordinate, row-major from (0, 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellPos {
    pub row: usize,
    pub col: usize,
}

impl CellPos {
    pub fn new(row: usize, col: usize) -> Self {
        CellPos { row, col }
    }

    /// Manhattan distance to another cell.
    pub fn distance(&self, other: &CellPos) -> usize {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl fmt::Display for CellPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Axis-aligned rectangle of cells, corners inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rect {
    pub r0: usize,
    pub c0: usize,
    pub r1: usize,
    pub c1: usize,
}

impl Rect {
    pub fn new(r0: usize, c0: usize, r1: usize, c1: usize) -> Self {
        Rect { r0, c0, r1, c1 }
    }

    pub fn contains(&self, cell: &CellPos) -> bool {
        cell.row >= self.r0 && cell.row <= self.r1 && cell.col >= self.c0 && cell.col <= self.c1
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rect({},{},{},{})", self.r0, self.c0, self.r1, self.c1)
    }
}

/// A concrete value a state variable may take, or a literal appearing in a
/// fluent. Regions never occur inside property domains; they exist so that
/// containment predicates can carry a region literal as an argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Sym(Arc<str>),
    Int(i64),
    Cell(CellPos),
    Region(Rect),
}

impl Value {
    pub fn sym(s: &str) -> Value {
        Value::Sym(Arc::from(s))
    }

    pub fn cell(row: usize, col: usize) -> Value {
        Value::Cell(CellPos::new(row, col))
    }

    pub fn as_cell(&self) -> Option<&CellPos> {
        match self {
            Value::Cell(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Sym(s) => write!(f, "{s}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Cell(c) => write!(f, "{c}"),
            Value::Region(r) => write!(f, "{r}"),
        }
    }
}

/// A named property together with its finite, ordered value domain.
/// Domain order is the canonical tuple-enumeration order everywhere.
#[derive(Debug, PartialEq)]
pub struct PropertySchema {
    pub name: String,
    pub domain: Vec<Value>,
}

impl PropertySchema {
    pub fn new(name: &str, domain: Vec<Value>) -> Arc<Self> {
        assert!(!domain.is_empty(), "property domain must be non-empty");
        Arc::new(PropertySchema {
            name: name.to_string(),
            domain,
        })
    }

    /// Index of `v` in the domain, if it is a member.
    pub fn index_of(&self, v: &Value) -> Option<usize> {
        self.domain.iter().position(|d| d == v)
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }
}

#[derive(Debug)]
pub struct ObjectType {
    pub name: String,
    pub properties: Vec<Arc<PropertySchema>>,
}

impl ObjectType {
    pub fn property(&self, name: &str) -> Option<&Arc<PropertySchema>> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// One cell of the world description: a property applied to an object,
/// e.g. `contents(L3)`. Identity is the (property, object) name pair; the
/// domain rides along so holders never need the registry to enumerate values.
#[derive(Debug, Clone)]
pub struct StateVariable {
    pub object: Arc<str>,
    pub property: Arc<PropertySchema>,
}

impl StateVariable {
    pub fn new(property: Arc<PropertySchema>, object: Arc<str>) -> Self {
        StateVariable { object, property }
    }

    pub fn domain(&self) -> &[Value] {
        &self.property.domain
    }

    pub fn domain_len(&self) -> usize {
        self.property.domain.len()
    }
}

impl PartialEq for StateVariable {
    fn eq(&self, other: &Self) -> bool {
        self.property.name == other.property.name && self.object == other.object
    }
}

impl Eq for StateVariable {}

impl PartialOrd for StateVariable {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StateVariable {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.property.name, &self.object).cmp(&(&other.property.name, &other.object))
    }
}

impl std::hash::Hash for StateVariable {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.property.name.hash(state);
        self.object.hash(state);
    }
}

impl fmt::Display for StateVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.property.name, self.object)
    }
}

/// A total or partial assignment of state variables to values.
pub type Assignment = BTreeMap<StateVariable, Value>;

/// Declared types plus the set of objects seen so far.
#[derive(Debug, Default, Clone)]
pub struct SchemaRegistry {
    types: Vec<Arc<ObjectType>>,
    objects: BTreeMap<Arc<str>, Arc<ObjectType>>,
}

impl SchemaRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare_type(&mut self, name: &str, properties: Vec<Arc<PropertySchema>>) -> Result<Arc<ObjectType>, SchemaError> {
        if self.types.iter().any(|t| t.name == name) {
            return Err(SchemaError::DuplicateType(name.to_string()));
        }
        for p in &properties {
            if p.domain.is_empty() {
                return Err(SchemaError::EmptyDomain(p.name.clone()));
            }
        }
        let ty = Arc::new(ObjectType {
            name: name.to_string(),
            properties,
        });
        self.types.push(ty.clone());
        Ok(ty)
    }

    pub fn add_object(&mut self, name: &str, type_name: &str) -> Result<(), SchemaError> {
        let ty = self
            .types
            .iter()
            .find(|t| t.name == type_name)
            .cloned()
            .ok_or_else(|| SchemaError::UnknownType(type_name.to_string()))?;
        if self.objects.contains_key(name) {
            return Err(SchemaError::DuplicateObject(name.to_string()));
        }
        self.objects.insert(Arc::from(name), ty);
        Ok(())
    }

    pub fn object_type(&self, name: &str) -> Option<&Arc<ObjectType>> {
        self.objects.get(name)
    }

    pub fn objects(&self) -> impl Iterator<Item = (&Arc<str>, &Arc<ObjectType>)> {
        self.objects.iter()
    }

    /// State variable for a declared object. The object must exist and its
    /// type must declare the property.
    pub fn state_variable(&self, property: &str, object: &str) -> Result<StateVariable, SchemaError> {
        let (name, ty) = self
            .objects
            .get_key_value(object)
            .ok_or_else(|| SchemaError::UnknownObject(object.to_string()))?;
        let prop = ty
            .property(property)
            .ok_or_else(|| SchemaError::NoSuchProperty {
                object: object.to_string(),
                ty: ty.name.clone(),
                property: property.to_string(),
            })?;
        Ok(StateVariable::new(prop.clone(), name.clone()))
    }

    /// State variable for `property(object)`, registering the object if it has
    /// never been mentioned. The inferred type of a fresh object is the first
    /// declared type carrying that property.
    pub fn resolve(&mut self, property: &str, object: &str) -> Result<StateVariable, SchemaError> {
        if let Some((name, ty)) = self.objects.get_key_value(object) {
            let prop = ty
                .property(property)
                .ok_or_else(|| SchemaError::NoSuchProperty {
                    object: object.to_string(),
                    ty: ty.name.clone(),
                    property: property.to_string(),
                })?;
            return Ok(StateVariable::new(prop.clone(), name.clone()));
        }
        let ty = self
            .types
            .iter()
            .find(|t| t.property(property).is_some())
            .cloned()
            .ok_or_else(|| SchemaError::UnknownProperty(property.to_string()))?;
        let name: Arc<str> = Arc::from(object);
        let prop = ty.property(property).unwrap().clone();
        self.objects.insert(name.clone(), ty);
        Ok(StateVariable::new(prop, name))
    }

    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        let file: SchemaFile = serde_json::from_str(text)?;
        let mut reg = SchemaRegistry::new();
        for t in file.types {
            let props = t
                .properties
                .into_iter()
                .map(|p| PropertySchema::new(&p.name, p.domain.into_iter().map(Value::from).collect()))
                .collect();
            reg.declare_type(&t.name, props)?;
        }
        for o in file.objects {
            reg.add_object(&o.name, &o.ty)?;
        }
        Ok(reg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, SchemaError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct SchemaFile {
    types: Vec<TypeDto>,
    #[serde(default)]
    objects: Vec<ObjectDto>,
}

#[derive(Deserialize)]
struct TypeDto {
    name: String,
    properties: Vec<PropertyDto>,
}

#[derive(Deserialize)]
struct PropertyDto {
    name: String,
    domain: Vec<ValueDto>,
}

#[derive(Deserialize)]
struct ObjectDto {
    name: String,
    #[serde(rename = "type")]
    ty: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ValueDto {
    Int(i64),
    Sym(String),
    Cell { cell: [usize; 2] },
    Rect { rect: [usize; 4] },
}

impl From<ValueDto> for Value {
    fn from(dto: ValueDto) -> Value {
        match dto {
            ValueDto::Int(i) => Value::Int(i),
            ValueDto::Sym(s) => Value::Sym(Arc::from(s.as_str())),
            ValueDto::Cell { cell } => Value::cell(cell[0], cell[1]),
            ValueDto::Rect { rect } => Value::Region(Rect::new(rect[0], rect[1], rect[2], rect[3])),
        }
    }
}
