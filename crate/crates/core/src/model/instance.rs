use std::path::Path;

use serde::{Deserialize, Serialize};

use super::distribution::DistributionSpec;
use super::strategy::BidStrategy;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `n >= 2` bidders with independent value distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionInstance<S> {
    pub bidders: Vec<DistributionSpec<S>>,
}

impl<S: Scalar> AuctionInstance<S> {
    pub fn new(bidders: Vec<DistributionSpec<S>>) -> Result<Self> {
        let inst = Self { bidders };
        inst.validate()?;
        Ok(inst)
    }

    /// `n` copies of `dist`.
    pub fn symmetric(dist: DistributionSpec<S>, n: usize) -> Result<Self> {
        Self::new(vec![dist; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.bidders.len() < 2 {
            return Err(Error::InvalidInstance(format!(
                "an auction needs at least two bidders, got {}",
                self.bidders.len()
            )));
        }
        for (i, d) in self.bidders.iter().enumerate() {
            d.validate()
                .map_err(|e| Error::InvalidInstance(format!("bidder {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.bidders.len()
    }

    pub fn bidder(&self, i: usize) -> &DistributionSpec<S> {
        &self.bidders[i]
    }

    /// True when every bidder has the same distribution.
    pub fn is_symmetric(&self) -> bool {
        self.bidders.windows(2).all(|w| w[0] == w[1])
    }

    /// Largest upper support bound.
    pub fn max_value(&self) -> S {
        self.bidders
            .iter()
            .map(|d| d.support().1)
            .fold(S::zero(), |a, b| a.max(b))
    }

    /// Sorted, deduplicated union of all bidders' CDF breakpoints.
    pub fn breakpoints(&self) -> Vec<S> {
        let mut pts: Vec<S> = self.bidders.iter().flat_map(|d| d.breakpoints()).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        pts.dedup();
        pts
    }

    /// Checks that `strategies` holds one valid strategy per bidder on the
    /// matching support.
    pub fn validate_profile(&self, strategies: &[BidStrategy<S>]) -> Result<()> {
        if strategies.len() != self.n() {
            return Err(Error::InvalidStrategy(format!(
                "expected {} strategies, got {}",
                self.n(),
                strategies.len()
            )));
        }
        for (i, (s, d)) in strategies.iter().zip(&self.bidders).enumerate() {
            s.validate_for(d)
                .map_err(|e| Error::InvalidStrategy(format!("bidder {i}: {e}")))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn cast<T: Scalar>(&self) -> AuctionInstance<T> {
        AuctionInstance {
            bidders: self.bidders.iter().map(|d| d.cast()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spec_format() {
        let text = r#"{"bidders":[{"kind":"uniform","lo":0.0,"hi":1.0},
            {"kind":"power","a":2.0,"h":1.0},
            {"kind":"piecewise","knots":[[0,0],[0.5,0.7],[1,1]]}]}"#;
        let inst = AuctionInstance::<f64>::from_json(text).unwrap();
        assert_eq!(inst.n(), 3);
        assert!(!inst.is_symmetric());
        assert_eq!(inst.breakpoints(), vec![0.0, 0.5, 1.0]);
        let back = AuctionInstance::<f64>::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_single_bidder_and_bad_json() {
        let one = r#"{"bidders":[{"kind":"uniform","lo":0.0,"hi":1.0}]}"#;
        assert!(matches!(
            AuctionInstance::<f64>::from_json(one),
            Err(Error::InvalidInstance(_))
        ));
        assert!(matches!(
            AuctionInstance::<f64>::from_json("{\"bidders\": 3"),
            Err(Error::Parse(_))
        ));
        let bad = r#"{"bidders":[{"kind":"uniform","lo":1.0,"hi":0.0},{"kind":"uniform","lo":0.0,"hi":1.0}]}"#;
        assert!(matches!(
            AuctionInstance::<f64>::from_json(bad),
            Err(Error::InvalidInstance(_))
        ));
    }
}
