//! Partitions of a value space into equivalence classes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::ValueSpace;

/// Separator used when joining member labels into a macro-value label.
pub const MACRO_JOIN: &str = "∨";

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small] = big;
        self.size[big] += self.size[small];
    }

    pub fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        let roots: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        Partition::from_assignment(&roots)
    }
}

/// A quotient of `0..n` into non-empty, disjoint, exhaustive classes.
///
/// Canonical form: members of each class sorted ascending, classes sorted by their
/// smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    n: usize,
    classes: Vec<Vec<usize>>,
}

impl Partition {
    /// Validates and canonicalizes an explicit list of classes over `0..n`.
    pub fn from_classes(n: usize, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (ci, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::InvalidPartition(format!("class {ci} is empty")));
            }
            for &i in class {
                if i >= n {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} out of range for {n} values"
                    )));
                }
                if owner[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "index {i} appears in more than one class"
                    )));
                }
                owner[i] = ci;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        Ok(Self::from_assignment(&owner))
    }

    /// Builds the partition grouping indices that share an assignment key.
    pub fn from_assignment<K: PartialEq>(keys: &[K]) -> Self {
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut reps: Vec<&K> = Vec::new();
        for (i, k) in keys.iter().enumerate() {
            match reps.iter().position(|r| *r == k) {
                Some(c) => classes[c].push(i),
                None => {
                    reps.push(k);
                    classes.push(vec![i]);
                }
            }
        }
        // first-appearance order is already "smallest member first"
        Partition {
            n: keys.len(),
            classes,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            classes: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            n,
            classes: if n == 0 { vec![] } else { vec![(0..n).collect()] },
        }
    }

    /// Finest partition in which `i` and `j` share a class whenever `related(i, j)`.
    /// The relation is closed transitively.
    pub fn closure_of<F>(n: usize, mut related: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                if related(i, j) {
                    uf.union(i, j);
                }
            }
        }
        uf.into_partition()
    }

    pub fn n_elements(&self) -> usize {
        self.n
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class(&self, c: usize) -> &[usize] {
        &self.classes[c]
    }

    /// Class index of every element.
    pub fn assignment(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (c, class) in self.classes.iter().enumerate() {
            for &i in class {
                out[i] = c;
            }
        }
        out
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.classes
            .iter()
            .position(|c| c.contains(&i))
            .expect("index within partition")
    }

    pub fn is_singletons(&self) -> bool {
        self.classes.len() == self.n
    }

    /// Macro-value labels: member labels joined with `∨`.
    pub fn macro_labels(&self, space: &ValueSpace) -> Vec<String> {
        self.classes
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&i| space.label(i))
                    .collect::<Vec<_>>()
                    .join(MACRO_JOIN)
            })
            .collect()
    }

    /// Value space whose labels are this partition's macro labels.
    pub fn macro_space(&self, space: &ValueSpace) -> Result<ValueSpace> {
        self.check_space(space)?;
        ValueSpace::new(self.macro_labels(space))
    }

    /// Member labels of every class.
    pub fn labelled_classes(&self, space: &ValueSpace) -> Vec<Vec<String>> {
        self.classes
            .iter()
            .map(|c| c.iter().map(|&i| space.label(i).to_string()).collect())
            .collect()
    }

    /// Lifts a partition of this partition's classes back onto the elements.
    pub fn lift(&self, over_classes: &Partition) -> Result<Partition> {
        if over_classes.n != self.classes.len() {
            return Err(Error::Shape(format!(
                "partition over {} classes cannot lift a partition of {} classes",
                over_classes.n,
                self.classes.len()
            )));
        }
        let class_of = self.assignment();
        let coarse = over_classes.assignment();
        let keys: Vec<usize> = class_of.iter().map(|&c| coarse[c]).collect();
        Ok(Partition::from_assignment(&keys))
    }

    /// Relabels elements: element `old` becomes `new` where `order[new] = old`.
    pub fn permuted(&self, order: &[usize]) -> Result<Partition> {
        if order.len() != self.n {
            return Err(Error::Shape("permutation length".into()));
        }
        let assign = self.assignment();
        let keys: Vec<usize> = order.iter().map(|&old| assign[old]).collect();
        Ok(Partition::from_assignment(&keys))
    }

    pub(crate) fn check_space(&self, space: &ValueSpace) -> Result<()> {
        if space.len() != self.n {
            return Err(Error::Shape(format!(
                "partition over {} values used with a space of {}",
                self.n,
                space.len()
            )));
        }
        Ok(())
    }
}

/// Quotient of `space` induced by a reflexive, symmetric relation given as a boolean table;
/// the transitive closure is taken.
pub fn partition_from_pairs(space: &ValueSpace, equivalent: &[Vec<bool>]) -> Result<Partition> {
    let n = space.len();
    if equivalent.len() != n || equivalent.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!(
            "equivalence table must be {n}x{n}"
        )));
    }
    Ok(Partition::closure_of(n, |i, j| {
        equivalent[i][j] || equivalent[j][i]
    }))
}

/// True iff every class of `fine` lies inside some class of `coarse`.
pub fn refines(coarse: &Partition, fine: &Partition) -> Result<bool> {
    if coarse.n != fine.n {
        return Err(Error::Shape(format!(
            "partitions over {} and {} values",
            coarse.n, fine.n
        )));
    }
    let owner = coarse.assignment();
    Ok(fine
        .classes
        .iter()
        .all(|class| class.iter().all(|&i| owner[i] == owner[class[0]])))
}
