//! Shared fixtures for the benchmark targets.

use annulus_core::{AnnulusBody, BodyStack};

pub fn reference_annulus() -> AnnulusBody {
    AnnulusBody::new(1.0, 0.75, 1.0).expect("reference annulus")
}

pub fn reference_stack() -> BodyStack {
    BodyStack::single(reference_annulus())
}

pub fn two_annuli() -> BodyStack {
    BodyStack::new(vec![
        AnnulusBody::new(0.5, 0.3, 1.0).expect("inner"),
        AnnulusBody::new(1.0, 0.75, 1.0).expect("outer"),
    ])
    .expect("stack")
}
