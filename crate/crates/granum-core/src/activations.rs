//! Scalar activations and their analytic derivatives.

use crate::math;
use crate::tensor::Tensor;

pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Derivative of relu with respect to its input; defined as 0 at x == 0 so
/// runs are reproducible.
pub fn relu_prime(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        0.0
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + math::exp(-x))
}

/// Derivative of sigmoid expressed through its output s = sigmoid(x).
pub fn sigmoid_prime_from_output(s: f64) -> f64 {
    s * (1.0 - s)
}

pub fn tanh(x: f64) -> f64 {
    math::tanh(x)
}

/// Derivative of tanh expressed through its output t = tanh(x).
pub fn tanh_prime_from_output(t: f64) -> f64 {
    1.0 - t * t
}

/// Activation applied after a dense or convolutional pre-activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => relu(x),
        }
    }

    /// Derivative with respect to the pre-activation value.
    #[inline]
    pub fn prime(self, pre: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Relu => relu_prime(pre),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    pub fn from_name(name: &str) -> Option<Activation> {
        match name {
            "identity" => Some(Activation::Identity),
            "relu" => Some(Activation::Relu),
            _ => None,
        }
    }

    pub fn map(self, t: &Tensor) -> Tensor {
        t.map(|x| self.apply(x))
    }
}
