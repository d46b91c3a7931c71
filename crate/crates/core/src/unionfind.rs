/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    /// Returns the surviving root.
    pub fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
        a
    }

    pub fn same(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r] as usize
    }
}

/// Union-find that also tracks, for every element, the parity of a path to
/// its root. Uniting along an edge with parity `w` when both ends are
/// already joined reveals a cycle whose total parity is odd iff the stored
/// parities disagree with `w`.
#[derive(Clone, Debug)]
pub struct ParityUnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    parity: Vec<u8>,
    odd: Vec<bool>,
}

impl ParityUnionFind {
    pub fn new(n: usize) -> Self {
        ParityUnionFind {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            parity: vec![0; n],
            odd: vec![false; n],
        }
    }

    /// Root of `x` and the parity of `x` relative to it.
    pub fn find(&mut self, x: usize) -> (usize, u8) {
        let mut path = Vec::new();
        let mut cur = x;
        while self.parent[cur] as usize != cur {
            path.push(cur);
            cur = self.parent[cur] as usize;
        }
        let root = cur;
        // compress from the top down so parities accumulate correctly
        for &node in path.iter().rev() {
            let p = self.parent[node] as usize;
            if p != root {
                self.parity[node] ^= self.parity[p];
            }
            self.parent[node] = root as u32;
        }
        (root, self.parity[x])
    }

    pub fn union(&mut self, a: usize, b: usize, w: u8) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa ^ pb != w {
                self.odd[ra] = true;
            }
            return;
        }
        let (big, small) = if self.rank[ra] >= self.rank[rb] { (ra, rb) } else { (rb, ra) };
        self.parent[small] = big as u32;
        self.parity[small] = pa ^ pb ^ w;
        if self.rank[big] == self.rank[small] {
            self.rank[big] += 1;
        }
        self.odd[big] = self.odd[big] || self.odd[small];
    }

    /// Whether the component of `x` contains a cycle of odd parity.
    pub fn has_odd_cycle(&mut self, x: usize) -> bool {
        let (r, _) = self.find(x);
        self.odd[r]
    }
}
