use crate::error::{Error, Result};
use crate::thermo::check_admissible;

/// Field components of the state tuple, in stacking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Density = 0,
    Momentum = 1,
    Energy = 2,
}

/// Nodal coefficients of `(rho, M, u)` stacked as `[rho..., M..., u...]`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    n: usize,
    data: Vec<f64>,
}

impl State {
    pub fn new(rho: Vec<f64>, mom: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        let n = rho.len();
        if mom.len() != n || u.len() != n {
            return Err(Error::config("state components have different lengths"));
        }
        let mut data = rho;
        data.extend(mom);
        data.extend(u);
        Ok(State { n, data })
    }

    pub fn from_stacked(data: Vec<f64>) -> Result<Self> {
        if !data.len().is_multiple_of(3) {
            return Err(Error::config("stacked vector length is not a multiple of 3"));
        }
        Ok(State {
            n: data.len() / 3,
            data,
        })
    }

    pub fn uniform(n: usize, rho: f64, mom: f64, u: f64) -> Self {
        State::new(vec![rho; n], vec![mom; n], vec![u; n]).expect("equal lengths")
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: Component) -> &[f64] {
        let k = c as usize;
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn rho(&self) -> &[f64] {
        self.component(Component::Density)
    }

    pub fn mom(&self) -> &[f64] {
        self.component(Component::Momentum)
    }

    pub fn u(&self) -> &[f64] {
        self.component(Component::Energy)
    }

    /// `self + scale * dir`.
    pub fn axpy(&self, scale: f64, dir: &[f64]) -> State {
        debug_assert_eq!(dir.len(), self.data.len());
        State {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(dir)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    pub fn check_admissible(&self) -> Result<()> {
        for (rho, u) in self.rho().iter().zip(self.u()) {
            check_admissible(*rho, *u)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stacking_order() {
        let z = State::new(vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(z.mom(), &[3.0, 4.0]);
        assert!(State::new(vec![1.0], vec![], vec![1.0]).is_err());
        assert!(State::from_stacked(vec![0.0; 4]).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(State::uniform(3, 1.0, 0.0, 1.0).check_admissible().is_ok());
        let z = State::new(vec![1.0, 0.0], vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(matches!(z.check_admissible(), Err(Error::Domain(_))));
    }
}
