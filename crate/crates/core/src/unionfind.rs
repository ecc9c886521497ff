//! Disjoint sets over original nodes. Each class carries a label, which the
//! contraction state keeps equal to the shallowest original node of the
//! class so super-node ids stay meaningful in the original tree.

#[derive(Clone, Debug)]
pub(crate) struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
    label: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            label: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn root(&self, mut node: usize) -> usize {
        while self.parent[node] != node {
            node = self.parent[node];
        }
        node
    }

    /// Label of the class containing `node`.
    pub(crate) fn find(&self, node: usize) -> usize {
        self.label[self.root(node)]
    }

    pub(crate) fn class_size(&self, node: usize) -> usize {
        self.size[self.root(node)]
    }

    /// Merges the classes of `a` and `b` and labels the result `label`.
    pub(crate) fn union(&mut self, a: usize, b: usize, label: usize) {
        let mut a = self.root(a);
        let mut b = self.root(b);
        if a != b {
            if self.rank[a] < self.rank[b] {
                std::mem::swap(&mut a, &mut b);
            }
            self.parent[b] = a;
            self.size[a] += self.size[b];
            if self.rank[a] == self.rank[b] {
                self.rank[a] = self.rank[a].saturating_add(1);
            }
        }
        self.label[a] = label;
    }
}

#[cfg(test)]
mod tests {
    use super::DisjointSet;

    #[test]
    fn union_relabels_class() {
        let mut dsu = DisjointSet::new(5);
        dsu.union(3, 4, 3);
        dsu.union(4, 1, 1);
        assert_eq!(dsu.find(3), 1);
        assert_eq!(dsu.find(4), 1);
        assert_eq!(dsu.class_size(4), 3);
        assert_eq!(dsu.find(0), 0);
        assert_eq!(dsu.class_size(0), 1);
    }
}
