"""Exception hierarchy. Every error raised on bad input derives from IbacError."""


class IbacError(Exception):
    pass


class PolicyError(IbacError):
    """The policy document or schema is unusable."""


class LabelError(IbacError):
    """A label set is invalid for the operation (unknown name, wrong level count, ...)."""


class TokenError(IbacError):
    """A token is malformed, of the wrong scheme, or cannot be transformed."""


class HierarchyError(IbacError):
    pass


class RegistryError(IbacError):
    pass


class StoreError(IbacError):
    pass
