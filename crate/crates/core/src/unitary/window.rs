use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of the N encoding channels (plus guard bands) inside the
/// K-dimensional DFT space.
///
/// The working window is every channel within `guard` of an encoding
/// channel. It must fit inside `0..k` without wrapping around.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelWindow {
    k: usize,
    guard: usize,
    center: usize,
    channel_indices: Vec<usize>,
}

impl ChannelWindow {
    /// Contiguous window centred on `k / 2`.
    pub fn centered(k: usize, n: usize, guard: usize) -> Result<Self> {
        Self::contiguous(k, n, guard, k / 2)
    }

    /// `n` adjacent channels; the middle one (lower-middle for even `n`)
    /// sits at `center`, so `n = 2` occupies `center` and `center + 1`.
    pub fn contiguous(k: usize, n: usize, guard: usize, center: usize) -> Result<Self> {
        Self::strided(k, n, guard, center, 1)
    }

    /// `n` channels spaced `stride` apart around `center`.
    pub fn strided(k: usize, n: usize, guard: usize, center: usize, stride: usize) -> Result<Self> {
        if n == 0 || stride == 0 {
            return Err(Error::InvalidArgument("window needs n >= 1 and stride >= 1".into()));
        }
        let back = stride * ((n - 1) / 2);
        if back > center {
            return Err(Error::InvalidArgument(format!(
                "window of {n} channels does not fit left of center {center}"
            )));
        }
        let first = center - back;
        let indices = (0..n).map(|i| first + i * stride).collect();
        Self::from_indices(k, guard, center, indices)
    }

    /// Arbitrary sorted, distinct encoding channels (used for parallel gates).
    pub fn from_indices(k: usize, guard: usize, center: usize, mut indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("window needs at least one channel".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate channel index".into()));
        }
        let n = indices.len();
        if n + 2 * guard > k {
            return Err(Error::InvalidArgument(format!(
                "N + 2d = {} exceeds K = {k}",
                n + 2 * guard
            )));
        }
        let first = indices[0];
        let last = indices[n - 1];
        if first < guard || last + guard >= k {
            return Err(Error::InvalidArgument(format!(
                "working window [{}, {}] wraps outside 0..{k}",
                first as i64 - guard as i64,
                last + guard
            )));
        }
        if center >= k {
            return Err(Error::IndexOutOfRange { index: center, dim: k });
        }
        Ok(Self { k, guard, center, channel_indices: indices })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.channel_indices.len()
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn channel_indices(&self) -> &[usize] {
        &self.channel_indices
    }

    /// Sorted indices of encoding and guard channels.
    pub fn working_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &c in &self.channel_indices {
            for i in c - self.guard..=c + self.guard {
                if out.last().is_none_or(|&l| l < i) {
                    out.push(i);
                }
            }
        }
        out
    }

    /// Membership mask of the working window over `0..k`.
    pub fn working_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.k];
        for i in self.working_indices() {
            mask[i] = true;
        }
        mask
    }

    /// Same encoding channels with a different guard count.
    pub fn with_guard(&self, guard: usize) -> Result<Self> {
        Self::from_indices(self.k, guard, self.center, self.channel_indices.clone())
    }

    /// The window translated by `shift` channels.
    pub fn shifted(&self, shift: isize) -> Result<Self> {
        let mv = |i: usize| -> Result<usize> {
            let j = i as isize + shift;
            if j < 0 || j as usize >= self.k {
                Err(Error::IndexOutOfRange { index: j.max(0) as usize, dim: self.k })
            } else {
                Ok(j as usize)
            }
        };
        let indices = self.channel_indices.iter().map(|&i| mv(i)).collect::<Result<Vec<_>>>()?;
        Self::from_indices(self.k, self.guard, mv(self.center)?, indices)
    }
}
