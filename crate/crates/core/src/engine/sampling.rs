use rand::seq::index;
use rand::RngCore;

use crate::error::{Error, Result};

/// Uniform `sample_size`-subset of `0..n_clients`, ascending.
pub fn sample_clients(n_clients: usize, sample_size: usize, rng: &mut dyn RngCore) -> Result<Vec<usize>> {
    if sample_size == 0 || sample_size > n_clients {
        return Err(Error::InvalidSampleSize {
            sample_size,
            n_clients,
        });
    }
    if sample_size == n_clients {
        return Ok((0..n_clients).collect());
    }
    let mut chosen = index::sample(rng, n_clients, sample_size).into_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exhaustive_and_singleton() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(sample_clients(5, 5, &mut rng).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(sample_clients(1, 1, &mut rng).unwrap(), vec![0]);
    }

    #[test]
    fn invalid_sizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_clients(3, 0, &mut rng), Err(Error::InvalidSampleSize { .. })));
        assert!(matches!(sample_clients(3, 4, &mut rng), Err(Error::InvalidSampleSize { .. })));
    }

    #[test]
    fn distinct_sorted_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let s = sample_clients(20, 7, &mut rng).unwrap();
            assert_eq!(s.len(), 7);
            assert!(s.windows(2).all(|p| p[0] < p[1]));
            assert!(s.iter().all(|&k| k < 20));
        }
    }
}
