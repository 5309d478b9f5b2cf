"""Detection of abnormal human expressions in Bengali text.

The public API is defined here.

"""

from leb.abnormality.corpus import (  # noqa: F401
    Corpus,
    CorpusError,
    Document,
    Label,
    Split,
    clean_text,
    load_corpus,
    split_corpus,
)
from leb.abnormality.tokenizer import tokenize  # noqa: F401
from leb.abnormality.vectorize import (  # noqa: F401
    FeatureKind,
    FeatureMatrix,
    SparseVector,
    TfidfStats,
    Vocabulary,
    VocabularyError,
    count_vectorize,
    fit_tfidf,
    fit_vocabulary,
    inverse_document_frequency,
    term_frequency,
    tfidf_vectorize,
    vectorize_documents,
)
from leb.abnormality.naive_bayes import (  # noqa: F401
    NaiveBayesError,
    NbModel,
    nb_fit,
    nb_predict,
)
from leb.abnormality.kernels import KernelKind, KernelSpec, kernel_eval  # noqa: F401
from leb.abnormality.svm import (  # noqa: F401
    SolverConfig,
    SvmConvergenceError,
    SvmError,
    SvmModel,
    svm_decision,
    svm_fit,
    svm_predict,
)
from leb.abnormality.pipeline import (  # noqa: F401
    ClassifierKind,
    NbConfig,
    Pipeline,
    SvmConfig,
    fit_classifier,
    fit_features,
    fit_pipeline,
)
from leb.abnormality.evaluate import (  # noqa: F401
    Criterion,
    GridResult,
    GridSearchError,
    GridSpec,
    MetricReport,
    compute_metrics,
    default_grid,
    evaluate_pipeline,
    grid_search,
)
from leb.abnormality.persist import (  # noqa: F401
    Metadata,
    ModelBundle,
    ModelFormatError,
    ModelIOError,
    load_model,
    save_model,
)
from leb.abnormality.simulation import corpus_simulation  # noqa: F401
