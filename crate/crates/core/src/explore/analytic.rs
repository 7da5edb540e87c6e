//! Classifiers with closed-form boundaries, for validating the explorer.

use super::{Class, Classifier, ExploreError, Unit};

fn class(failure: bool) -> Class {
    if failure {
        Class::Failure
    } else {
        Class::Success
    }
}

/// Same answer everywhere.
#[derive(Clone, Copy, Debug)]
pub struct Constant(pub Class);

impl Classifier for Constant {
    fn classify(&mut self, _: &Unit) -> Result<Class, ExploreError> {
        Ok(self.0)
    }

    fn is_cheap(&self) -> bool {
        true
    }
}

/// Failure where `normal . u > offset`.
#[derive(Clone, Copy, Debug)]
pub struct Plane {
    pub normal: Unit,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, u: &Unit) -> f64 {
        let n = self.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        (super::dot(&self.normal, u) - self.offset) / n
    }
}

impl Classifier for Plane {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        Ok(class(self.signed_distance(u) > 0.0))
    }

    fn is_cheap(&self) -> bool {
        true
    }
}

/// Failure strictly inside the ball.
#[derive(Clone, Copy, Debug)]
pub struct Sphere {
    pub center: Unit,
    pub radius: f64,
}

impl Sphere {
    pub fn distance_to_surface(&self, u: &Unit) -> f64 {
        (super::dist(&self.center, u) - self.radius).abs()
    }
}

impl Classifier for Sphere {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        Ok(class(super::dist(&self.center, u) < self.radius))
    }

    fn is_cheap(&self) -> bool {
        true
    }
}

/// Failure where coordinate `axis` is below `threshold`.
#[derive(Clone, Copy, Debug)]
pub struct HalfSpace {
    pub axis: usize,
    pub threshold: f64,
}

impl Classifier for HalfSpace {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        Ok(class(u[self.axis] < self.threshold))
    }

    fn is_cheap(&self) -> bool {
        true
    }
}

/// Wraps a classifier and counts calls, optionally sleeping to mimic an
/// expensive evaluation.
pub struct Counting<C> {
    pub inner: C,
    pub calls: usize,
    pub delay: Option<std::time::Duration>,
}

impl<C> Counting<C> {
    pub fn new(inner: C) -> Self {
        Self {
            inner,
            calls: 0,
            delay: None,
        }
    }
}

impl<C: Classifier> Classifier for Counting<C> {
    fn classify(&mut self, u: &Unit) -> Result<Class, ExploreError> {
        self.calls += 1;
        if let Some(d) = self.delay {
            std::thread::sleep(d);
        }
        self.inner.classify(u)
    }
}
