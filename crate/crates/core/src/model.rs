//! Domain types shared by every index: ticks, intervals, positions, contacts
//! and reachability queries.

use std::fmt;

use crate::scalar::Scalar;

/// A sampling step. One tick is one position-sampling period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TimeInstant(pub u32);

impl fmt::Display for TimeInstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for TimeInstant {
    fn from(t: u32) -> Self {
        TimeInstant(t)
    }
}

/// Closed tick interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeInterval {
    pub start: TimeInstant,
    pub end: TimeInstant,
}

impl TimeInterval {
    /// Panics if `start > end`.
    pub fn new(start: u32, end: u32) -> Self {
        assert!(start <= end, "interval start {start} after end {end}");
        TimeInterval { start: TimeInstant(start), end: TimeInstant(end) }
    }

    pub fn try_new(start: u32, end: u32) -> Option<Self> {
        (start <= end).then(|| TimeInterval::new(start, end))
    }

    /// Horizon `[0, ticks - 1]`.
    pub fn horizon(ticks: u32) -> Self {
        assert!(ticks > 0, "empty horizon");
        TimeInterval::new(0, ticks - 1)
    }

    /// Number of ticks covered (both ends inclusive).
    pub fn len(&self) -> u32 {
        self.end.0 - self.start.0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: TimeInstant) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn contains_interval(&self, other: &TimeInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &TimeInterval) -> bool {
        interval_intersect(self, other).is_some()
    }

    pub fn ticks(&self) -> std::ops::RangeInclusive<u32> {
        self.start.0..=self.end.0
    }
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

/// Common sub-interval of `a` and `b`, or `None` when they are disjoint.
pub fn interval_intersect(a: &TimeInterval, b: &TimeInterval) -> Option<TimeInterval> {
    let start = a.start.max(b.start);
    let end = a.end.min(b.end);
    (start <= end).then_some(TimeInterval { start, end })
}

/// Dense object identifier in `[0, |O|)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ObjectId(pub u32);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "o{}", self.0)
    }
}

impl From<u32> for ObjectId {
    fn from(id: u32) -> Self {
        ObjectId(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Point { x, y }
    }

    pub fn dist_sq(&self, other: &Point<S>) -> S {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point<S>) -> S {
        self.dist_sq(other).sqrt()
    }

    /// Contact condition: Euclidean distance `<= d_t`.
    pub fn within(&self, other: &Point<S>, d_t: S) -> bool {
        self.dist_sq(other) <= d_t * d_t
    }
}

/// The rectangle `[0, width] x [0, height]` objects move in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentBounds<S> {
    pub width: S,
    pub height: S,
}

impl<S: Scalar> EnvironmentBounds<S> {
    pub fn new(width: S, height: S) -> Self {
        assert!(width > S::zero() && height > S::zero(), "environment must have positive extent");
        EnvironmentBounds { width, height }
    }

    pub fn contains(&self, p: &Point<S>) -> bool {
        p.x.is_finite()
            && p.y.is_finite()
            && p.x >= S::zero()
            && p.y >= S::zero()
            && p.x <= self.width
            && p.y <= self.height
    }

    pub fn clamp(&self, p: Point<S>) -> Point<S> {
        Point::new(p.x.max(S::zero()).min(self.width), p.y.max(S::zero()).min(self.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<S> {
    pub object: ObjectId,
    pub t: TimeInstant,
    pub pos: Point<S>,
}

/// A maximal run of proximity between two objects. `a < b` always.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Contact {
    pub a: ObjectId,
    pub b: ObjectId,
    pub validity: TimeInterval,
}

impl Contact {
    /// Canonicalizes the pair order. Panics on a self-contact.
    pub fn new(x: ObjectId, y: ObjectId, validity: TimeInterval) -> Self {
        assert_ne!(x, y, "contact needs two distinct objects");
        Contact { a: x.min(y), b: x.max(y), validity }
    }

    pub fn involves(&self, o: ObjectId) -> bool {
        self.a == o || self.b == o
    }

    pub fn shares_object(&self, other: &Contact) -> bool {
        self.involves(other.a) || self.involves(other.b)
    }
}

impl fmt::Display for Contact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}{}", self.a, self.b, self.validity)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContactPath {
    pub contacts: Vec<Contact>,
}

impl ContactPath {
    pub fn new(contacts: Vec<Contact>) -> Self {
        ContactPath { contacts }
    }
}

/// `source ->[interval] destination`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReachabilityQuery {
    pub source: ObjectId,
    pub destination: ObjectId,
    pub interval: TimeInterval,
}

impl ReachabilityQuery {
    pub fn new(source: u32, destination: u32, start: u32, end: u32) -> Self {
        ReachabilityQuery {
            source: ObjectId(source),
            destination: ObjectId(destination),
            interval: TimeInterval::new(start, end),
        }
    }

    pub fn t1(&self) -> u32 {
        self.interval.start.0
    }

    pub fn t2(&self) -> u32 {
        self.interval.end.0
    }

    /// Floor midpoint of the interval; both traversal directions own it.
    pub fn midpoint(&self) -> u32 {
        (self.t1() + self.t2()) / 2
    }
}

impl fmt::Display for ReachabilityQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.source, self.interval, self.destination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config<S> {
    /// Contact distance threshold in meters.
    pub d_t: S,
    pub environment: EnvironmentBounds<S>,
    pub horizon: TimeInterval,
}

impl<S: Scalar> Config<S> {
    pub fn new(d_t: S, environment: EnvironmentBounds<S>, horizon: TimeInterval) -> Self {
        assert!(d_t > S::zero(), "d_T must be positive");
        Config { d_t, environment, horizon }
    }
}

/// Checks that `path` carries an item from `q.source` to `q.destination`
/// within `q.interval`.
///
/// Every contact must overlap the interval, the first contact must involve the
/// source and the last the destination, consecutive contacts must share an
/// object, and validity starts must be non-decreasing. Same-tick chains are
/// accepted since contact edges inside a tick are bidirectional.
pub fn validate_contact_path(path: &ContactPath, q: &ReachabilityQuery) -> bool {
    let (Some(first), Some(last)) = (path.contacts.first(), path.contacts.last()) else {
        return false;
    };
    if !first.involves(q.source) || !last.involves(q.destination) {
        return false;
    }
    if !path.contacts.iter().all(|c| c.validity.overlaps(&q.interval)) {
        return false;
    }
    path.contacts.windows(2).all(|w| {
        w[0].shares_object(&w[1]) && w[0].validity.start <= w[1].validity.start
    })
}
