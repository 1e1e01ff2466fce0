use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::mask::{for_each_neighbor8, BinaryMask, LabelMask};

/// 8-connected foreground components by flood fill, labelled `1..=K` in
/// raster-scan discovery order.
pub fn connected_components(mask: &BinaryMask) -> LabelMask {
    let (n1, n2) = mask.shape();
    let mut labels = DMatrix::<u32>::zeros(n1, n2);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for i in 0..n1 {
        for j in 0..n2 {
            if !mask.get(i, j) || labels[(i, j)] != 0 {
                continue;
            }
            next += 1;
            labels[(i, j)] = next;
            queue.push_back((i, j));
            while let Some((a, b)) = queue.pop_front() {
                for_each_neighbor8(a, b, n1, n2, |p, q| {
                    if mask.get(p, q) && labels[(p, q)] == 0 {
                        labels[(p, q)] = next;
                        queue.push_back((p, q));
                    }
                });
            }
        }
    }
    LabelMask(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(mask: &mut BinaryMask, r: usize, c: usize, s: usize) {
        for i in r..r + s {
            for j in c..c + s {
                mask.set(i, j, true);
            }
        }
    }

    #[test]
    fn one_square() {
        let mut m = BinaryMask::empty(10, 10);
        square(&mut m, 2, 3, 4);
        let l = connected_components(&m);
        assert_eq!(l.max_label(), 1);
        assert_eq!(l.areas()[1], 16);
    }

    #[test]
    fn two_squares() {
        let mut m = BinaryMask::empty(10, 12);
        square(&mut m, 0, 0, 3);
        square(&mut m, 5, 6, 3);
        assert_eq!(connected_components(&m).max_label(), 2);
    }

    #[test]
    fn diagonal_touch_is_one_object() {
        let mut m = BinaryMask::empty(8, 8);
        square(&mut m, 0, 0, 3);
        square(&mut m, 3, 3, 3);
        let l = connected_components(&m);
        assert_eq!(l.max_label(), 1);
    }

    #[test]
    fn raster_order() {
        let m = BinaryMask(DMatrix::from_row_slice(3, 4, &[
            false, false, false, true,
            true, false, false, false,
            false, false, true, false,
        ]));
        let l = connected_components(&m);
        assert_eq!(l.get(0, 3), 1);
        assert_eq!(l.get(1, 0), 2);
        assert_eq!(l.get(2, 2), 3);
    }
}
