//! Activity-ordered binary heap of decision variables.

const NOT_IN_HEAP: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub(crate) struct VarOrder {
    activity: Vec<f64>,
    heap: Vec<u32>,
    pos: Vec<u32>,
    inc: f64,
    decay: f64,
}

impl VarOrder {
    pub fn new(decay: f64) -> VarOrder {
        VarOrder {
            activity: Vec::new(),
            heap: Vec::new(),
            pos: Vec::new(),
            inc: 1.0,
            decay,
        }
    }

    pub fn grow(&mut self, num_vars: usize) {
        while self.activity.len() < num_vars {
            let v = self.activity.len() as u32;
            self.activity.push(0.0);
            self.pos.push(NOT_IN_HEAP);
            self.insert(v);
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.pos[v as usize] != NOT_IN_HEAP
    }

    pub fn insert(&mut self, v: u32) {
        if self.contains(v) {
            return;
        }
        self.pos[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1);
    }

    pub fn pop(&mut self) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.pos[self.heap[0] as usize] = 0;
            self.sift_down(0);
        }
        Some(top)
    }

    pub fn bump(&mut self, v: u32) {
        let a = &mut self.activity[v as usize];
        *a += self.inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.inc *= 1e-100;
        }
        if self.contains(v) {
            self.sift_up(self.pos[v as usize] as usize);
        }
    }

    pub fn decay(&mut self) {
        self.inc /= self.decay;
    }

    fn less(&self, a: u32, b: u32) -> bool {
        // higher activity first, lower index breaks ties
        let (x, y) = (self.activity[a as usize], self.activity[b as usize]);
        x > y || (x == y && a < b)
    }

    fn sift_up(&mut self, mut i: usize) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !self.less(v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p as usize] = i as u32;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }

    fn sift_down(&mut self, mut i: usize) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && self.less(self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !self.less(c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c as usize] = i as u32;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i as u32;
    }
}
