//! Shared domain types: exact money, the battery under analysis and market intervals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("cannot combine {left} with {right} without an exchange rate")]
    CurrencyMismatch { left: Currency, right: Currency },
    #[error("exchange rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("money arithmetic overflowed")]
    Overflow,
    #[error("invalid battery: {0}")]
    InvalidBattery(String),
    #[error("interval duration must be positive and finite, got {0} h")]
    InvalidDuration(f64),
    #[error("unknown currency `{0}`")]
    UnknownCurrency(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Currency {
    DKK,
    EUR,
}

impl fmt::Display for Currency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Currency::DKK => "DKK",
            Currency::EUR => "EUR",
        })
    }
}

impl FromStr for Currency {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DKK" => Ok(Currency::DKK),
            "EUR" => Ok(Currency::EUR),
            other => Err(ModelError::UnknownCurrency(other.to_string())),
        }
    }
}

/// An amount in integer minor units (øre or euro-cents).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Money {
    minor: i64,
    currency: Currency,
}

impl Money {
    pub const fn from_minor(minor: i64, currency: Currency) -> Self {
        Self { minor, currency }
    }

    /// Whole kroner or euros.
    pub fn from_major(major: i64, currency: Currency) -> Self {
        Self::from_minor(major * 100, currency)
    }

    /// Rounds a fractional major amount half-up (away from zero) to minor units.
    pub fn from_major_f64(major: f64, currency: Currency) -> Self {
        Self::from_minor((major * 100.0).round() as i64, currency)
    }

    pub const fn zero(currency: Currency) -> Self {
        Self::from_minor(0, currency)
    }

    pub fn minor(&self) -> i64 {
        self.minor
    }

    pub fn currency(&self) -> Currency {
        self.currency
    }

    pub fn as_major_f64(&self) -> f64 {
        self.minor as f64 / 100.0
    }

    pub fn checked_add(self, other: Money) -> Result<Money, ModelError> {
        self.same_currency(&other)?;
        self.minor
            .checked_add(other.minor)
            .map(|m| Money::from_minor(m, self.currency))
            .ok_or(ModelError::Overflow)
    }

    pub fn checked_sub(self, other: Money) -> Result<Money, ModelError> {
        self.same_currency(&other)?;
        self.minor
            .checked_sub(other.minor)
            .map(|m| Money::from_minor(m, self.currency))
            .ok_or(ModelError::Overflow)
    }

    fn same_currency(&self, other: &Money) -> Result<(), ModelError> {
        if self.currency == other.currency {
            Ok(())
        } else {
            Err(ModelError::CurrencyMismatch {
                left: self.currency,
                right: other.currency,
            })
        }
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.minor < 0 { "-" } else { "" };
        let abs = self.minor.unsigned_abs();
        write!(
            f,
            "{sign}{}.{:02} {}",
            group_thousands(abs / 100),
            abs % 100,
            self.currency
        )
    }
}

/// `1062500` -> `1 062 500`.
pub(crate) fn group_thousands(value: u64) -> String {
    let digits = value.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, ch) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(' ');
        }
        out.push(ch);
    }
    out
}

/// Divides rounding half away from zero. `den` must be positive.
pub(crate) fn div_round_half_up(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    let q = num / den;
    let r = num % den;
    if 2 * r.abs() >= den {
        q + num.signum()
    } else {
        q
    }
}

/// DKK per EUR, held as an integer number of millionths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeRate {
    micro_dkk_per_eur: i64,
}

impl ExchangeRate {
    const SCALE: i128 = 1_000_000;

    /// Not a published figure; Denmark's peg convention, overridable everywhere.
    pub const DEFAULT_DKK_PER_EUR: f64 = 7.45;

    pub fn new(dkk_per_eur: f64) -> Result<Self, ModelError> {
        if !dkk_per_eur.is_finite() || dkk_per_eur <= 0.0 {
            return Err(ModelError::InvalidRate(dkk_per_eur));
        }
        let micro = (dkk_per_eur * Self::SCALE as f64).round();
        if micro < 1.0 || micro > i64::MAX as f64 {
            return Err(ModelError::InvalidRate(dkk_per_eur));
        }
        Ok(Self {
            micro_dkk_per_eur: micro as i64,
        })
    }

    pub fn dkk_per_eur(&self) -> f64 {
        self.micro_dkk_per_eur as f64 / Self::SCALE as f64
    }
}

impl Default for ExchangeRate {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DKK_PER_EUR).expect("default rate is valid")
    }
}

/// Converts between DKK and EUR, rounding half-up to minor units of the target currency.
pub fn convert(money: Money, rate: ExchangeRate) -> Result<Money, ModelError> {
    let amount = money.minor as i128;
    let micro = rate.micro_dkk_per_eur as i128;
    let (converted, currency) = match money.currency {
        Currency::DKK => (
            div_round_half_up(amount * ExchangeRate::SCALE, micro),
            Currency::EUR,
        ),
        Currency::EUR => (
            div_round_half_up(amount * micro, ExchangeRate::SCALE),
            Currency::DKK,
        ),
    };
    let minor = i64::try_from(converted).map_err(|_| ModelError::Overflow)?;
    Ok(Money::from_minor(minor, currency))
}

/// Exact sum; an empty list yields zero in `currency`.
pub fn money_sum<'a, I>(items: I, currency: Currency) -> Result<Money, ModelError>
where
    I: IntoIterator<Item = &'a Money>,
{
    items
        .into_iter()
        .try_fold(Money::zero(currency), |acc, m| acc.checked_add(*m))
}

/// The asset under analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBattery")]
pub struct BatterySpec {
    rated_power_mw: f64,
    energy_capacity_mwh: f64,
    round_trip_efficiency: f64,
}

#[derive(Deserialize)]
struct RawBattery {
    rated_power_mw: f64,
    energy_capacity_mwh: f64,
    round_trip_efficiency: f64,
}

impl TryFrom<RawBattery> for BatterySpec {
    type Error = ModelError;

    fn try_from(raw: RawBattery) -> Result<Self, Self::Error> {
        BatterySpec::new(
            raw.rated_power_mw,
            raw.energy_capacity_mwh,
            raw.round_trip_efficiency,
        )
    }
}

impl BatterySpec {
    pub fn new(
        rated_power_mw: f64,
        energy_capacity_mwh: f64,
        round_trip_efficiency: f64,
    ) -> Result<Self, ModelError> {
        if !(rated_power_mw.is_finite() && rated_power_mw > 0.0) {
            return Err(ModelError::InvalidBattery(format!(
                "rated power must be positive, got {rated_power_mw} MW"
            )));
        }
        if !(energy_capacity_mwh.is_finite() && energy_capacity_mwh > 0.0) {
            return Err(ModelError::InvalidBattery(format!(
                "energy capacity must be positive, got {energy_capacity_mwh} MWh"
            )));
        }
        if !(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0) {
            return Err(ModelError::InvalidBattery(format!(
                "round-trip efficiency must lie in (0, 1], got {round_trip_efficiency}"
            )));
        }
        Ok(Self {
            rated_power_mw,
            energy_capacity_mwh,
            round_trip_efficiency,
        })
    }

    pub fn rated_power_mw(&self) -> f64 {
        self.rated_power_mw
    }

    pub fn energy_capacity_mwh(&self) -> f64 {
        self.energy_capacity_mwh
    }

    pub fn round_trip_efficiency(&self) -> f64 {
        self.round_trip_efficiency
    }

    /// Grid-to-cell efficiency; the round trip is split evenly between both directions.
    pub fn charge_efficiency(&self) -> f64 {
        self.round_trip_efficiency.sqrt()
    }

    pub fn discharge_efficiency(&self) -> f64 {
        self.round_trip_efficiency.sqrt()
    }
}

/// A market time slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub index: u32,
    pub duration_h: f64,
}

impl Interval {
    pub const DEFAULT_DURATION_H: f64 = 1.0;

    pub fn new(index: u32, duration_h: f64) -> Result<Self, ModelError> {
        if !(duration_h.is_finite() && duration_h > 0.0) {
            return Err(ModelError::InvalidDuration(duration_h));
        }
        Ok(Self { index, duration_h })
    }

    pub fn hourly(index: u32) -> Self {
        Self {
            index,
            duration_h: Self::DEFAULT_DURATION_H,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dkk(minor: i64) -> Money {
        Money::from_minor(minor, Currency::DKK)
    }

    #[test]
    fn converts_dkk_to_eur_exactly() {
        let rate = ExchangeRate::new(7.45).unwrap();
        let eur = convert(dkk(745_000), rate).unwrap();
        assert_eq!(eur, Money::from_minor(100_000, Currency::EUR));
    }

    #[test]
    fn converts_zero() {
        let rate = ExchangeRate::new(3.3).unwrap();
        assert_eq!(convert(dkk(0), rate).unwrap(), Money::zero(Currency::EUR));
    }

    #[test]
    fn converts_b_high_fee_with_rounding() {
        // 1 062 500.00 / 7.45 = 142 617.4496... -> 142 617.45
        let rate = ExchangeRate::new(7.45).unwrap();
        let eur = convert(Money::from_major(1_062_500, Currency::DKK), rate).unwrap();
        assert_eq!(eur.minor(), 14_261_745);
        // multiply back: 142 617.45 * 7.45 = 1 062 500.0025
        assert_eq!(convert(eur, rate).unwrap().minor(), 106_250_000);
    }

    #[test]
    fn rejects_non_positive_rates() {
        assert!(ExchangeRate::new(0.0).is_err());
        assert!(ExchangeRate::new(-7.45).is_err());
        assert!(ExchangeRate::new(f64::NAN).is_err());
    }

    #[test]
    fn sums_money() {
        let total = money_sum(&[dkk(875_000), dkk(125_000)], Currency::DKK).unwrap();
        assert_eq!(total, dkk(1_000_000));
        assert_eq!(money_sum(&[], Currency::DKK).unwrap(), dkk(0));
        assert_eq!(
            money_sum(&[dkk(4_242), dkk(-4_242)], Currency::DKK).unwrap(),
            dkk(0)
        );
    }

    #[test]
    fn rejects_mixed_currencies() {
        let err = money_sum(
            &[dkk(1), Money::from_minor(1, Currency::EUR)],
            Currency::DKK,
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::CurrencyMismatch { .. }));
    }

    #[test]
    fn displays_grouped_amounts() {
        assert_eq!(
            Money::from_major(1_062_500, Currency::DKK).to_string(),
            "1 062 500.00 DKK"
        );
        assert_eq!(
            Money::from_minor(-5, Currency::EUR).to_string(),
            "-0.05 EUR"
        );
    }

    #[test]
    fn battery_rejects_bad_fields() {
        assert!(BatterySpec::new(0.0, 1.0, 0.9).is_err());
        assert!(BatterySpec::new(1.0, -1.0, 0.9).is_err());
        assert!(BatterySpec::new(1.0, 1.0, 0.0).is_err());
        assert!(BatterySpec::new(1.0, 1.0, 1.01).is_err());
        let b = BatterySpec::new(1.0, 1.0, 0.81).unwrap();
        assert!((b.charge_efficiency() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn interval_rejects_zero_duration() {
        assert!(Interval::new(0, 0.0).is_err());
        assert!(Interval::new(0, 0.25).is_ok());
    }

    proptest! {
        #[test]
        fn eur_round_trip_within_one_minor_unit(
            cents in -1_000_000_000_000i64..1_000_000_000_000,
            rate in 0.5f64..50.0,
        ) {
            let rate = ExchangeRate::new(rate).unwrap();
            let m = Money::from_minor(cents, Currency::EUR);
            let back = convert(convert(m, rate).unwrap(), rate).unwrap();
            prop_assert!((back.minor() - cents).abs() <= 1);
        }

        #[test]
        fn dkk_round_trip_within_half_rate(
            ore in -1_000_000_000_000i64..1_000_000_000_000,
            rate in 0.5f64..50.0,
        ) {
            let rate = ExchangeRate::new(rate).unwrap();
            let m = Money::from_minor(ore, Currency::DKK);
            let back = convert(convert(m, rate).unwrap(), rate).unwrap();
            let bound = (rate.dkk_per_eur() / 2.0).ceil() as i64 + 1;
            prop_assert!((back.minor() - ore).abs() <= bound);
        }

        #[test]
        fn sum_is_order_independent(mut values in proptest::collection::vec(-1_000_000_000i64..1_000_000_000, 0..40)) {
            let forward: Vec<Money> = values.iter().map(|v| dkk(*v)).collect();
            let a = money_sum(&forward, Currency::DKK).unwrap();
            values.reverse();
            let backward: Vec<Money> = values.iter().map(|v| dkk(*v)).collect();
            let b = money_sum(&backward, Currency::DKK).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
