use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

/// A pending centre crossing of oscillator `index` (1-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub index: usize,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of crossings keyed by `(time, index)`, one entry per oscillator.
#[derive(Clone, Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_events(events: impl IntoIterator<Item = Event>) -> Self {
        Self {
            heap: events.into_iter().map(Reverse).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn push(&mut self, event: Event) {
        self.heap.push(Reverse(event));
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }

    pub fn peek(&self) -> Option<Event> {
        self.heap.peek().map(|Reverse(e)| *e)
    }

    /// All entries in pop order.
    pub fn sorted(&self) -> Vec<Event> {
        let mut v: Vec<Event> = self.heap.iter().map(|Reverse(e)| *e).collect();
        v.sort();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_break_by_index() {
        let mut q = EventQueue::with_events([
            Event {
                time: 1.0,
                index: 3,
            },
            Event {
                time: 1.0,
                index: 1,
            },
            Event {
                time: 0.5,
                index: 7,
            },
            Event {
                time: 1.0,
                index: 2,
            },
        ]);
        let order: Vec<usize> = std::iter::from_fn(|| q.pop()).map(|e| e.index).collect();
        assert_eq!(order, vec![7, 1, 2, 3]);
    }
}
