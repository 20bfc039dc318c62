"""Embedded list of common English words for the spoken-reply heuristic.

Roughly the few hundred most frequent words of conversational English plus
the short replies a search-and-rescue dialogue would elicit. Membership is
checked on lowercased whitespace tokens.
"""

COMMON_WORDS = frozenset("""
a about after again against all almost also always am an and any anybody
anyone anything are around as ask at away back bad be because been before
behind being below best better between big both but by call came can cannot
cant come could day did do does doing done dont down each even every
everything feel few find fine first for found from get give go going good
got great had has have he hello help her here hers him his hold home how
hurt i if im in injured inside is it its just keep know last leave left
let like little look looking lost made make man many may me men might more
most move much must my name near need never new next no nobody not nothing
now of off ok okay old on once one only open or other our out over own
people person please put quick right room said same say says see she should
so some somebody someone something soon sorry stay still stop stuck such
take tell than thank thanks that the their them then there these they thing
think this those through time to today together too took trapped try trying
under until up upon us used very wait walk wall want was water way we well
went were what when where which while who why will with within without woman
wont work would yes yet you your yours
""".split())
