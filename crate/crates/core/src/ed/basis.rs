use crate::error::{Error, Result};

/// Largest chain the 2-bit packing supports.
pub const MAX_SITES: usize = 32;

/// Fixed-N sector of the occupancy-≤2 constraint. States are packed two bits
/// per site (site 0 in the most significant position) and listed in
/// descending lexicographic order of their occupation tuples, so a state's
/// index follows from its occupations by combinatorial ranking.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_sites: usize,
    n_particles: usize,
    states: Vec<u64>,
    /// rank[(site·(N+1) + left)·4 + ρ]: how many sector states share the
    /// prefix but put more than ρ bosons on `site` when `left` remain.
    rank: Vec<usize>,
}

/// Σ_p C(L, p)·C(L−p, N−2p): choose the doubly occupied sites, then the singles.
pub fn sector_dimension(n_sites: usize, n_particles: usize) -> u128 {
    let binom = |n: usize, k: usize| -> u128 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    };
    (0..=n_particles / 2)
        .filter(|&p| p <= n_sites && n_particles - 2 * p <= n_sites - p)
        .map(|p| binom(n_sites, p) * binom(n_sites - p, n_particles - 2 * p))
        .sum()
}

impl SectorBasis {
    pub fn new(n_sites: usize, n_particles: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::invalid(format!("number of sites must lie in 1..={MAX_SITES}, got {n_sites}")));
        }
        if n_particles > 2 * n_sites {
            return Err(Error::EmptySector { n_sites, n_particles });
        }
        let dim = sector_dimension(n_sites, n_particles) as usize;
        let mut states = Vec::with_capacity(dim);
        enumerate(n_sites, 0, n_particles, 0, &mut states);
        debug_assert_eq!(states.len(), dim);
        Ok(Self { n_sites, n_particles, states, rank: rank_table(n_sites, n_particles) })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    /// Position of a packed state, or `None` if it lies outside the sector.
    #[inline]
    pub fn index_of(&self, packed: u64) -> Option<usize> {
        if self.n_sites < MAX_SITES && packed >> (2 * self.n_sites) != 0 {
            return None;
        }
        if packed & (packed >> 1) & LOW_BITS != 0 {
            return None;
        }
        // walking from the last site, the bosons left at a site are the
        // suffix sum including it
        let w = self.n_particles + 1;
        let (mut p, mut left, mut idx) = (packed, 0, 0);
        for table in self.rank.chunks_exact(4 * w).rev() {
            let rho = (p & 3) as usize;
            p >>= 2;
            left += rho;
            if left > self.n_particles {
                return None;
            }
            idx += table[4 * left + rho];
        }
        (left == self.n_particles).then_some(idx)
    }

    #[inline]
    pub fn shift(&self, site: usize) -> u32 {
        2 * (self.n_sites - 1 - site) as u32
    }

    /// Occupation of `site` in a packed state.
    #[inline]
    pub fn occ(&self, packed: u64, site: usize) -> u8 {
        ((packed >> self.shift(site)) & 3) as u8
    }

    #[inline]
    pub fn with_occ(&self, packed: u64, site: usize, rho: u8) -> u64 {
        let s = self.shift(site);
        (packed & !(3u64 << s)) | ((rho as u64) << s)
    }

    pub fn occupations(&self, i: usize) -> Vec<u8> {
        (0..self.n_sites).map(|j| self.occ(self.states[i], j)).collect()
    }

    pub fn pack(&self, occupations: &[u8]) -> Result<u64> {
        if occupations.len() != self.n_sites {
            return Err(Error::invalid(format!("expected {} occupations, got {}", self.n_sites, occupations.len())));
        }
        if occupations.iter().any(|&r| r > 2) {
            return Err(Error::invalid("occupations are capped at 2"));
        }
        Ok(occupations.iter().fold(0u64, |acc, &r| (acc << 2) | r as u64))
    }

    pub fn index_of_occupations(&self, occupations: &[u8]) -> Result<usize> {
        let packed = self.pack(occupations)?;
        self.index_of(packed).ok_or_else(|| {
            Error::invalid(format!("occupations {occupations:?} are not in the N = {} sector", self.n_particles))
        })
    }

    /// Number of doubly occupied sites.
    #[inline]
    pub fn pair_count(&self, packed: u64) -> u32 {
        // a site holds 2 (binary 10) iff its high bit is set
        let high = packed & 0xAAAA_AAAA_AAAA_AAAA;
        high.count_ones()
    }
}

const LOW_BITS: u64 = 0x5555_5555_5555_5555;

fn rank_table(n_sites: usize, n_particles: usize) -> Vec<usize> {
    let w = n_particles + 1;
    // ways[k·w + n]: tuples of k sites, each holding 0..=2, summing to n
    let mut ways = vec![0usize; (n_sites + 1) * w];
    ways[0] = 1;
    for k in 1..=n_sites {
        for n in 0..w {
            ways[k * w + n] = (n.saturating_sub(2)..=n).map(|m| ways[(k - 1) * w + m]).sum();
        }
    }
    let mut rank = vec![0; n_sites * w * 4];
    for site in 0..n_sites {
        let rest = (n_sites - site - 1) * w;
        for left in 0..w {
            for rho in 0..=2.min(left) {
                rank[(site * w + left) * 4 + rho] = (rho + 1..=2.min(left)).map(|v| ways[rest + left - v]).sum();
            }
        }
    }
    rank
}

fn enumerate(n_sites: usize, site: usize, left: usize, prefix: u64, out: &mut Vec<u64>) {
    if site == n_sites {
        if left == 0 {
            out.push(prefix);
        }
        return;
    }
    let room = 2 * (n_sites - site - 1);
    for rho in (0..=2usize.min(left)).rev() {
        if left - rho <= room {
            enumerate(n_sites, site + 1, left - rho, (prefix << 2) | rho as u64, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_sites_two_particles() {
        let b = SectorBasis::new(2, 2).unwrap();
        let occ: Vec<Vec<u8>> = (0..b.dim()).map(|i| b.occupations(i)).collect();
        assert_eq!(occ, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn large_sector_dimension() {
        assert_eq!(sector_dimension(24, 8), 5_612_805);
        assert_eq!(sector_dimension(12, 4), 1221);
        assert_eq!(sector_dimension(13, 4), 1651);
        assert_eq!(sector_dimension(10, 10), 8953);
    }

    #[test]
    fn empty_sector_is_an_error() {
        assert!(matches!(SectorBasis::new(3, 7), Err(Error::EmptySector { .. })));
        assert_eq!(SectorBasis::new(3, 6).unwrap().dim(), 1);
        assert_eq!(SectorBasis::new(3, 0).unwrap().dim(), 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn brute_force_enumeration(l in 1usize..8, n in 0usize..10) {
            prop_assume!(n <= 2 * l);
            let b = SectorBasis::new(l, n).unwrap();
            // all base-3 tuples with the right sum
            let mut brute: Vec<Vec<u8>> = Vec::new();
            for code in 0..3usize.pow(l as u32) {
                let mut c = code;
                let mut t = vec![0u8; l];
                for j in (0..l).rev() {
                    t[j] = (c % 3) as u8;
                    c /= 3;
                }
                if t.iter().map(|&r| r as usize).sum::<usize>() == n {
                    brute.push(t);
                }
            }
            brute.sort();
            brute.reverse();
            let ours: Vec<Vec<u8>> = (0..b.dim()).map(|i| b.occupations(i)).collect();
            prop_assert_eq!(&ours, &brute);
            prop_assert_eq!(b.dim() as u128, sector_dimension(l, n));
            for (i, t) in ours.iter().enumerate() {
                prop_assert_eq!(b.index_of_occupations(t).unwrap(), i);
                let pairs = t.iter().filter(|&&r| r == 2).count() as u32;
                prop_assert_eq!(b.pair_count(b.state(i)), pairs);
            }
        }
    }

    #[test]
    fn foreign_states_have_no_index() {
        let b = SectorBasis::new(4, 3).unwrap();
        let pack = |t: &[u64]| t.iter().fold(0u64, |a, &r| (a << 2) | r);
        assert_eq!(b.index_of(pack(&[2, 1, 0, 0])), Some(0));
        assert_eq!(b.index_of(pack(&[0, 0, 1, 2])), Some(b.dim() - 1));
        assert_eq!(b.index_of(pack(&[1, 1, 0, 0])), None);
        assert_eq!(b.index_of(pack(&[1, 1, 1, 1])), None);
        assert_eq!(b.index_of(pack(&[3, 0, 0, 0])), None);
        assert_eq!(b.index_of(pack(&[0, 0, 0, 3])), None);
        assert_eq!(b.index_of(1 << 8 | pack(&[2, 1, 0, 0])), None);
        let full = SectorBasis::new(MAX_SITES, 3).unwrap();
        assert_eq!(full.index_of(full.state(full.dim() - 1)), Some(full.dim() - 1));
    }
}
