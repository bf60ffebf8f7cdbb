"""Canonical altmetric feature schema.

Column order here is the order used by every file format, matrix and report.
"""

FEATURES = (
    "author_count",
    "mendeley",
    "citeulike",
    "news",
    "blogs",
    "reddit",
    "twitter",
    "retweets",
    "twitter_mentions",
    "facebook",
    "googleplus",
    "peer_review",
    "wikipedia",
    "total_platforms",
    "countries",
    "max_followers",
    "academic_status",
    "profession_twitter",
    "platform_max_mentions",
    "hashtags",
    "post_length",
)

CATEGORICAL = ("academic_status", "profession_twitter", "platform_max_mentions")
NUMERIC = tuple(f for f in FEATURES if f not in CATEGORICAL)

CITATION_YEARS = (2017, 2020)
CITATION_COLUMNS = {2017: "citations_2017", 2020: "citations_2020"}

REQUIRED_COLUMNS = ("doi",) + FEATURES
OPTIONAL_COLUMNS = ("citations_2017", "citations_2020", "discipline")
ALL_COLUMNS = REQUIRED_COLUMNS + OPTIONAL_COLUMNS

# Predictors that receive ln(1 + x) in the regression experiment.
LOG_FEATURES = (
    "mendeley",
    "wikipedia",
    "twitter",
    "max_followers",
    "countries",
    "facebook",
    "twitter_mentions",
    "citeulike",
    "hashtags",
    "blogs",
    "googleplus",
    "news",
    "reddit",
    "peer_review",
    "author_count",
)

DISPLAY_NAMES = {
    "author_count": "Author Count",
    "mendeley": "Mendeley Readership",
    "citeulike": "CiteULike Readership",
    "news": "News Mentions",
    "blogs": "Blogs",
    "reddit": "Reddit",
    "twitter": "Twitter",
    "retweets": "Retweets",
    "twitter_mentions": "Twitter Mentions",
    "facebook": "Facebook",
    "googleplus": "GooglePlus",
    "peer_review": "Peer Review",
    "wikipedia": "Wikipedia",
    "total_platforms": "Total Platforms",
    "countries": "Countries",
    "max_followers": "Max. Followers",
    "academic_status": "Academic Status",
    "profession_twitter": "Profession on Twitter",
    "platform_max_mentions": "Platform with Max Mentions",
    "hashtags": "HashTags",
    "post_length": "Post Length",
    "citations_2017": "Citations 2017",
    "citations_2020": "Citations 2020",
}


def canonical_index(name: str) -> int:
    """Position of ``name`` in the canonical order; unknown names sort last."""
    order = FEATURES + ("citations_2017", "citations_2020")
    try:
        return order.index(name)
    except ValueError:
        return len(order)
