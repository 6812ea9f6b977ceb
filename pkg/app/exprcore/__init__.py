from app.exprcore.constructions import (
    partition_of_unity,
    separating_function,
    shrink_cover,
    support_function,
    validate_partition,
    vertical_retraction,
    zero_function,
)
from app.exprcore.cover import Base, Cover, ProductChart
from app.exprcore.expr import (
    ONE,
    ZERO,
    Abs,
    Clamp,
    Const,
    Div,
    Expr,
    Max,
    Min,
    Pow,
    Sqrt,
    Var,
    as_expr,
    const,
    evaluate,
    var,
)
from app.exprcore.fields import (
    ConstantMatrix,
    Determinant,
    ExprMatrix,
    MatrixField,
    constant,
    identity,
)
from app.exprcore.maps import (
    Composition,
    ExprMap,
    Map,
    at_parameter,
    constant_map,
    identity_map,
    projection,
)
from app.exprcore.parser import parse_expr, parse_matrix
from app.exprcore.sampling import SamplePlan, SampleSet, sample, scan
from app.exprcore.semialgebraic import (
    Condition,
    Relation,
    SemialgebraicSet,
    nonnegative,
    positive,
    zero,
)

__all__ = (
    "ONE",
    "ZERO",
    "Abs",
    "Base",
    "Clamp",
    "Composition",
    "Condition",
    "Const",
    "ConstantMatrix",
    "Cover",
    "Determinant",
    "Div",
    "Expr",
    "ExprMap",
    "ExprMatrix",
    "Map",
    "MatrixField",
    "Max",
    "Min",
    "Pow",
    "ProductChart",
    "Relation",
    "SamplePlan",
    "SampleSet",
    "SemialgebraicSet",
    "Sqrt",
    "Var",
    "as_expr",
    "at_parameter",
    "const",
    "constant",
    "constant_map",
    "evaluate",
    "identity",
    "identity_map",
    "nonnegative",
    "parse_expr",
    "parse_matrix",
    "partition_of_unity",
    "positive",
    "projection",
    "sample",
    "scan",
    "separating_function",
    "shrink_cover",
    "support_function",
    "validate_partition",
    "var",
    "vertical_retraction",
    "zero",
    "zero_function",
)
