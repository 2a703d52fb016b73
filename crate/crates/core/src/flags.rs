use std::fmt;
use std::ops::{BitOr, BitOrAssign};

/// Warning bits attached to computed values. A flagged value is still the
/// best available estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags(u8);

impl Flags {
    pub const NONE: Flags = Flags(0);
    /// Photon angle below `1/γ`; paraxial expansion unreliable.
    pub const SMALL_ANGLE: Flags = Flags(1);
    /// `|u_p − u_k|` comparable to the momentum width.
    pub const TURNING_POINT: Flags = Flags(1 << 1);
    /// Momentum width above the paraxial limit.
    pub const WIDE_PACKET: Flags = Flags(1 << 2);
    /// Dispersive spreading time came out negative.
    pub const EXOTIC_DISPERSION: Flags = Flags(1 << 3);
    /// Quadrature ran out of panels.
    pub const NON_CONVERGENCE: Flags = Flags(1 << 4);

    pub const ALL: [(Flags, &'static str); 5] = [
        (Flags::SMALL_ANGLE, "small-angle"),
        (Flags::TURNING_POINT, "turning-point"),
        (Flags::WIDE_PACKET, "wide-packet"),
        (Flags::EXOTIC_DISPERSION, "exotic-dispersion"),
        (Flags::NON_CONVERGENCE, "non-convergence"),
    ];

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn insert(&mut self, other: Flags) {
        self.0 |= other.0;
    }

    pub fn set_if(&mut self, other: Flags, condition: bool) {
        if condition {
            self.insert(other);
        }
    }

    pub fn names(self) -> impl Iterator<Item = &'static str> {
        Self::ALL
            .into_iter()
            .filter(move |(f, _)| self.contains(*f))
            .map(|(_, name)| name)
    }
}

impl BitOr for Flags {
    type Output = Flags;
    fn bitor(self, rhs: Flags) -> Flags {
        Flags(self.0 | rhs.0)
    }
}

impl BitOrAssign for Flags {
    fn bitor_assign(&mut self, rhs: Flags) {
        self.0 |= rhs.0;
    }
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        let names: Vec<_> = self.names().collect();
        f.write_str(&names.join("|"))
    }
}
