use crate::execution::OpError;
use crate::registry::{Binding, BindingTable};
use crate::types::Payload;

/// Increments the first byte, wrapping at 256.
pub fn increment(data: &mut [u8]) -> Result<(), OpError> {
    match data.first_mut() {
        Some(b) => {
            *b = b.wrapping_add(1);
            Ok(())
        }
        None => Err(OpError::Precondition("array must be non-empty".into())),
    }
}

pub(super) fn register(t: &mut BindingTable) {
    t.insert(
        "builtin:benchmark/increment",
        Binding::inplace(1..=1, |_, data, _| {
            if let Payload::ByteArray(bytes) = data.payload_mut() {
                return increment(bytes);
            }
            Err(OpError::payload(0, "ByteArray", data))
        }),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_and_rejects_empty() {
        let mut d = [255u8, 7];
        increment(&mut d).unwrap();
        assert_eq!(d, [0, 7]);
        assert!(matches!(increment(&mut []), Err(OpError::Precondition(m)) if m == "array must be non-empty"));
    }
}
