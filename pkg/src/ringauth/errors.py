"""Exception types shared across the package."""


class RingAuthError(Exception):
    """Base class for all errors raised by this package."""


class SerializationError(RingAuthError):
    """A byte string could not be decoded into a group element or scalar."""


class WrongLengthError(SerializationError):
    pass


class InvalidEncodingError(SerializationError):
    """Well-sized input that is not a canonical encoding (bad flags, off curve)."""


class OffSubgroupError(SerializationError):
    """Canonical curve point outside the prime-order subgroup."""


class WireFormatError(RingAuthError):
    """Malformed frame or envelope bytes."""


class DecryptionError(RingAuthError):
    """Identity-based decryption produced no valid pseudonym."""


class ChannelError(RingAuthError):
    pass


class MacError(ChannelError):
    """Message authentication failed; decryption was not attempted."""


class ChannelDecryptError(ChannelError):
    """MAC passed but the recovered plaintext is not a valid ring list."""


class RingError(RingAuthError):
    """Invalid signer ring (too small, duplicate members, bad index)."""


class ExpiredRingListError(RingAuthError):
    pass


class InsufficientRingError(RingError):
    """Requested ring size exceeds the pseudonyms available."""


class RegistryError(RingAuthError):
    pass


class DuplicateIdentityError(RegistryError):
    pass


class UnknownIdentityError(RegistryError):
    pass


class TraceIntegrityError(RingAuthError):
    """Multiple registry identities matched one opened tag."""


class UnknownProfileError(RingAuthError):
    pass


class ScenarioError(RingAuthError):
    """Scenario file is structurally invalid or references unknown entities."""
