use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::corpus::Vocabulary;

use super::SkipgramError;

/// Binary Huffman tree over the vocabulary, stored as one code and one
/// inner-node path per word.
///
/// Inner nodes are numbered in creation order, so the root is always
/// `inner_count() - 1`. Paths run root first. Of the two nodes merged at each
/// step the lower-weight one (earlier-created on ties) gets bit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HuffmanTree {
    codes: Vec<Vec<u8>>,
    paths: Vec<Vec<usize>>,
}

impl HuffmanTree {
    pub fn from_counts(counts: &[u64]) -> Result<Self, SkipgramError> {
        let n = counts.len();
        if n < 2 {
            return Err(SkipgramError::VocabularyTooSmall(n));
        }
        let total = 2 * n - 1;
        let mut parent = vec![usize::MAX; total];
        let mut bit = vec![0u8; total];

        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = counts
            .iter()
            .enumerate()
            .map(|(id, &c)| Reverse((c, id)))
            .collect();
        let mut next = n;
        while heap.len() > 1 {
            let Reverse((c0, a)) = heap.pop().expect("heap has two nodes");
            let Reverse((c1, b)) = heap.pop().expect("heap has two nodes");
            parent[a] = next;
            parent[b] = next;
            bit[a] = 0;
            bit[b] = 1;
            heap.push(Reverse((c0 + c1, next)));
            next += 1;
        }
        let root = total - 1;

        let mut codes = Vec::with_capacity(n);
        let mut paths = Vec::with_capacity(n);
        for leaf in 0..n {
            let mut code = Vec::new();
            let mut path = Vec::new();
            let mut node = leaf;
            while node != root {
                code.push(bit[node]);
                node = parent[node];
                path.push(node - n);
            }
            code.reverse();
            path.reverse();
            codes.push(code);
            paths.push(path);
        }
        Ok(HuffmanTree { codes, paths })
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn inner_count(&self) -> usize {
        self.codes.len() - 1
    }

    pub fn code(&self, word: usize) -> &[u8] {
        &self.codes[word]
    }

    pub fn path(&self, word: usize) -> &[usize] {
        &self.paths[word]
    }

    /// Σ count(w) · |code(w)|
    pub fn weighted_length(&self, counts: &[u64]) -> u64 {
        counts
            .iter()
            .zip(&self.codes)
            .map(|(c, code)| c * code.len() as u64)
            .sum()
    }
}

pub fn build_huffman(vocab: &Vocabulary) -> Result<HuffmanTree, SkipgramError> {
    HuffmanTree::from_counts(&vocab.counts())
}
