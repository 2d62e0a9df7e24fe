use super::QccError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Lights Out on an `n × n` board: every cell is both a light and a
    /// switch, and a switch toggles its cell and the orthogonal neighbours.
    Square(usize),
    /// The 6.6.6 color-code triangle with `d` switches per side: switches
    /// are vertices, lights are the (boundary-truncated) hexagons.
    Triangle(usize),
}

/// Lights, switches and the incidence between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    pub geometry: Geometry,
    pub num_switches: usize,
    /// Switches toggling each light, ascending.
    pub lights: Vec<Vec<usize>>,
    /// Planar coordinates of every switch, in the geometry's own lattice basis.
    pub switch_coords: Vec<(i32, i32)>,
}

impl Lattice {
    pub fn num_lights(&self) -> usize {
        self.lights.len()
    }

    /// Lights toggled by pressing every switch marked in `flips`.
    pub fn syndrome_of(&self, flips: &[bool]) -> Vec<bool> {
        self.lights
            .iter()
            .map(|l| l.iter().filter(|&&s| flips[s]).count() % 2 == 1)
            .collect()
    }

    /// Lights adjacent to each switch.
    pub fn switch_lights(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_switches];
        for (l, ss) in self.lights.iter().enumerate() {
            for &s in ss {
                out[s].push(l);
            }
        }
        out
    }
}

pub fn build_lattice(geometry: Geometry) -> Result<Lattice, QccError> {
    match geometry {
        Geometry::Square(n) => {
            if n == 0 {
                return Err(QccError::InvalidSize(n));
            }
            Ok(square(n))
        }
        Geometry::Triangle(d) => {
            if d < 3 || d % 2 == 0 {
                return Err(QccError::InvalidDistance(d));
            }
            Ok(triangle(d))
        }
    }
}

fn square(n: usize) -> Lattice {
    let idx = |r: usize, c: usize| r * n + c;
    let mut lights = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let mut s = vec![idx(r, c)];
            if r > 0 {
                s.push(idx(r - 1, c));
            }
            if r + 1 < n {
                s.push(idx(r + 1, c));
            }
            if c > 0 {
                s.push(idx(r, c - 1));
            }
            if c + 1 < n {
                s.push(idx(r, c + 1));
            }
            s.sort_unstable();
            lights.push(s);
        }
    }
    let coords = (0..n * n).map(|i| ((i / n) as i32, (i % n) as i32)).collect();
    Lattice {
        geometry: Geometry::Square(n),
        num_switches: n * n,
        lights,
        switch_coords: coords,
    }
}

/// Points `(i, j)` with `i, j ≥ 0` and `i + j ≤ 3(d-1)/2` of the triangular
/// lattice. Removing the points with `i - j ≡ 1 (mod 3)` leaves a honeycomb
/// whose hexagons are centred on the removed points; those become lights and
/// the remaining points switches. The three corners are switches, so each
/// side carries `d` switches and the boundary hexagons are cut in half.
fn triangle(d: usize) -> Lattice {
    let side = (3 * (d - 1) / 2) as i32;
    let is_face = |i: i32, j: i32| (i - j).rem_euclid(3) == 1;
    let inside = |i: i32, j: i32| i >= 0 && j >= 0 && i + j <= side;

    let mut switch_id = std::collections::HashMap::new();
    let mut coords = Vec::new();
    let mut centres = Vec::new();
    for j in 0..=side {
        for i in 0..=side - j {
            if is_face(i, j) {
                centres.push((i, j));
            } else {
                switch_id.insert((i, j), coords.len());
                coords.push((i, j));
            }
        }
    }
    const NEIGHBOURS: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];
    let lights = centres
        .iter()
        .map(|&(i, j)| {
            let mut s: Vec<usize> = NEIGHBOURS
                .iter()
                .map(|&(di, dj)| (i + di, j + dj))
                .filter(|&(a, b)| inside(a, b))
                .map(|p| switch_id[&p])
                .collect();
            s.sort_unstable();
            s
        })
        .collect();
    Lattice {
        geometry: Geometry::Triangle(d),
        num_switches: coords.len(),
        lights,
        switch_coords: coords,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn square_incidence() {
        let l = build_lattice(Geometry::Square(3)).unwrap();
        assert_eq!(l.num_lights(), 9);
        assert_eq!(l.lights[4].len(), 5);
        assert_eq!(l.lights[0].len(), 3);
        assert_eq!(l.lights[1].len(), 4);
    }

    #[test]
    fn smallest_triangle() {
        let l = build_lattice(Geometry::Triangle(3)).unwrap();
        assert_eq!(l.num_switches, 7);
        assert_eq!(l.num_lights(), 3);
        for f in &l.lights {
            assert_eq!(f.len(), 4);
        }
        // the one interior vertex touches all three faces
        let per_switch = l.switch_lights();
        assert_eq!(per_switch.iter().filter(|f| f.len() == 3).count(), 1);
    }

    #[test]
    fn invalid_distances() {
        for d in [0, 1, 2, 4, 6] {
            assert_eq!(build_lattice(Geometry::Triangle(d)), Err(QccError::InvalidDistance(d)));
        }
        assert!(build_lattice(Geometry::Square(0)).is_err());
    }

    #[test]
    fn triangle_counts_and_structure() {
        for d in (3..=15).step_by(2) {
            let l = build_lattice(Geometry::Triangle(d)).unwrap();
            assert_eq!(l.num_switches, (3 * d * d + 1) / 4, "d={d}");
            assert_eq!(l.num_lights(), 3 * (d * d - 1) / 8, "d={d}");
            // faces are hexagons or half-hexagons
            for f in &l.lights {
                assert!(f.len() == 4 || f.len() == 6, "d={d}");
            }
            // every switch sits on one to three faces
            for fs in l.switch_lights() {
                assert!((1..=3).contains(&fs.len()));
            }
            // neighbouring faces share an edge (two vertices), so all overlaps are even
            for a in 0..l.num_lights() {
                for b in a + 1..l.num_lights() {
                    let sa: HashSet<_> = l.lights[a].iter().collect();
                    let n = l.lights[b].iter().filter(|s| sa.contains(s)).count();
                    assert!(n % 2 == 0, "d={d}");
                }
            }
            // d switches on each side: count vertices with i=0, j=0, i+j=side
            let side = (3 * (d - 1) / 2) as i32;
            let on = |p: fn(i32, i32, i32) -> bool| l.switch_coords.iter().filter(|&&(i, j)| p(i, j, side)).count();
            assert_eq!(on(|i, _, _| i == 0), d);
            assert_eq!(on(|_, j, _| j == 0), d);
            assert_eq!(on(|i, j, s| i + j == s), d);
            // Euler: V - E + F = 1 for the patch. Edges join adjacent switches,
            // plus one boundary segment closing each half hexagon
            let ids: HashSet<(i32, i32)> = l.switch_coords.iter().copied().collect();
            let edges = l
                .switch_coords
                .iter()
                .flat_map(|&(i, j)| [(i + 1, j), (i, j + 1), (i + 1, j - 1)].map(|q| ids.contains(&q)))
                .filter(|&b| b)
                .count()
                + l.lights.iter().filter(|f| f.len() == 4).count();
            assert_eq!(l.num_switches as i64 - edges as i64 + l.num_lights() as i64, 1, "d={d}");
        }
    }
}
