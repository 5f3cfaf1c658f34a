use std::collections::HashMap;

/// Integer label for a symbol. `EPSILON` (0) is reserved.
pub type Label = u32;

pub const EPSILON: Label = 0;
pub const EPSILON_STR: &str = "<eps>";

/// Bidirectional map between labels and surface strings.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    symbols: Vec<String>,
    index: HashMap<String, Label>,
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut index = HashMap::new();
        index.insert(EPSILON_STR.to_string(), EPSILON);
        SymbolTable {
            symbols: vec![EPSILON_STR.to_string()],
            index,
        }
    }

    /// Interns `sym`, returning its existing label when already present.
    pub fn add(&mut self, sym: &str) -> Label {
        if let Some(&l) = self.index.get(sym) {
            return l;
        }
        let l = self.symbols.len() as Label;
        self.symbols.push(sym.to_string());
        self.index.insert(sym.to_string(), l);
        l
    }

    pub fn find(&self, sym: &str) -> Option<Label> {
        self.index.get(sym).copied()
    }

    pub fn symbol(&self, label: Label) -> Option<&str> {
        self.symbols.get(label as usize).map(String::as_str)
    }

    /// Number of symbols including epsilon.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.len() <= 1
    }

    /// Non-epsilon labels in ascending order.
    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        (1..self.symbols.len()).map(|l| l as Label)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i as Label, s.as_str()))
    }
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PartialEq for SymbolTable {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for SymbolTable {}

impl<S: AsRef<str>> FromIterator<S> for SymbolTable {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut t = SymbolTable::new();
        for s in iter {
            t.add(s.as_ref());
        }
        t
    }
}
