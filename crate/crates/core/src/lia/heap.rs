/// Max-heap of variables keyed by activity; ties go to the lower index.
#[derive(Clone, Debug, Default)]
pub struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<Option<usize>>,
}

fn better(act: &[f64], a: u32, b: u32) -> bool {
    let (x, y) = (act[a as usize], act[b as usize]);
    x > y || (x == y && a < b)
}

impl VarHeap {
    pub fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, None);
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.pos.get(v as usize).is_some_and(Option::is_some)
    }

    pub fn insert(&mut self, v: u32, act: &[f64]) {
        self.grow(v as usize + 1);
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v as usize] = Some(i);
        self.sift_up(i, act);
    }

    pub fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    /// Call after the activity of `v` increased.
    pub fn bumped(&mut self, v: u32, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v as usize).copied() {
            self.sift_up(i, act);
        }
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if better(act, self.heap[i], self.heap[parent]) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        loop {
            let l = 2 * i + 1;
            let r = l + 1;
            let mut best = i;
            if l < self.heap.len() && better(act, self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < self.heap.len() && better(act, self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, i: usize, j: usize) {
        self.heap.swap(i, j);
        self.pos[self.heap[i] as usize] = Some(i);
        self.pos[self.heap[j] as usize] = Some(j);
    }
}
