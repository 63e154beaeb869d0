//! 8-connected component labeling and breadth-first traversal helpers.

use std::collections::VecDeque;

use crate::raster::{neighbors, BinaryMask, Pixel};

/// Component labels (1-based, 0 = background) and the number of components.
/// Labels are assigned in row-major order of each component's first pixel.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, u32) {
    let shape = mask.shape();
    let mut labels = vec![0u32; shape.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in mask.pixels() {
        if labels[shape.index(start)] != 0 {
            continue;
        }
        next += 1;
        labels[shape.index(start)] = next;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            for q in neighbors(p, shape) {
                let i = shape.index(q);
                if mask.get(q) && labels[i] == 0 {
                    labels[i] = next;
                    queue.push_back(q);
                }
            }
        }
    }
    (labels, next)
}

pub fn count_components(mask: &BinaryMask) -> u32 {
    label_components(mask).1
}

/// Unit-cost BFS hop counts from `start` over 8-connected foreground pixels.
/// `u32::MAX` marks unreachable cells. `start` must be foreground.
pub fn bfs_distances(mask: &BinaryMask, start: Pixel) -> Vec<u32> {
    let shape = mask.shape();
    let mut dist = vec![u32::MAX; shape.len()];
    let mut queue = VecDeque::new();
    dist[shape.index(start)] = 0;
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        let d = dist[shape.index(p)] + 1;
        for q in neighbors(p, shape) {
            let i = shape.index(q);
            if mask.get(q) && dist[i] == u32::MAX {
                dist[i] = d;
                queue.push_back(q);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_touch_is_one_component() {
        let m = BinaryMask::from_ascii("#..\n.#.\n..#\n...\n##.").unwrap();
        assert_eq!(count_components(&m), 2);
    }

    #[test]
    fn bfs_counts_hops() {
        let m = BinaryMask::from_ascii("####\n...#\n...#").unwrap();
        let d = bfs_distances(&m, Pixel::new(0, 0));
        assert_eq!(d[m.shape().index(Pixel::new(2, 3))], 4);
        assert_eq!(d[m.shape().index(Pixel::new(2, 0))], u32::MAX);
    }
}
