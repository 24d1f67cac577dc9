#pragma once

namespace quantbench {

// Default financial lexicon in the lexicon text format (word,weight lines
// followed by a #negations section). Mirrors data/default_lexicon.csv.
inline constexpr const char* kBuiltinLexiconText = R"lex(
accelerate,0.6
accelerates,0.6
advance,0.5
advances,0.5
agreement,0.3
approval,0.7
approved,0.7
attractive,0.5
bankrupt,-1.0
bankruptcy,-1.0
bearish,-0.8
beat,0.8
beats,0.8
blockbuster,1.0
boom,0.8
breach,-0.7
breakthrough,0.9
bullish,0.8
buyback,0.7
caution,-0.4
cautious,-0.4
churn,-0.4
collapse,-1.0
collapsed,-1.0
collapses,-1.0
competition,-0.3
competitive,-0.3
concern,-0.5
concerned,-0.5
concerns,-0.5
constructive,0.4
crash,-1.0
crashed,-1.0
crashes,-1.0
crisis,-0.8
cut,-0.6
cuts,-0.6
debt,-0.6
decline,-0.7
declined,-0.7
declines,-0.7
default,-0.9
deficit,-0.7
delay,-0.4
delayed,-0.4
delays,-0.4
demand,0.4
dilution,-0.4
disappoint,-0.6
disappointed,-0.6
disappointing,-0.6
disappoints,-0.6
dividend,0.6
downgrade,-0.8
downgraded,-0.8
downturn,-0.7
drop,-0.7
dropped,-0.7
drops,-0.7
efficient,0.4
encouraging,0.5
exceed,0.7
exceeded,0.7
exceeds,0.7
expand,0.4
expanded,0.4
expands,0.4
expansion,0.6
fail,-0.7
failed,-0.7
fails,-0.7
failure,-0.7
fall,-0.7
falling,-0.7
falls,-0.7
favorable,0.5
fell,-0.7
fine,-0.6
fined,-0.6
fraud,-1.0
gain,0.7
gains,0.7
glut,-0.4
growing,0.4
growth,0.7
hack,-0.7
hacked,-0.7
halt,-0.6
halted,-0.6
headwind,-0.5
headwinds,-0.5
healthy,0.5
hire,0.3
hires,0.3
hiring,0.3
impressive,0.5
improve,0.6
improved,0.6
improvement,0.6
improves,0.6
innovation,0.6
innovative,0.6
invest,0.3
investigation,-0.7
investment,0.3
jump,0.7
jumped,0.7
jumps,0.7
launch,0.4
launched,0.4
launches,0.4
lawsuit,-0.8
layoff,-0.7
layoffs,-0.7
litigation,-0.6
loss,-0.7
losses,-0.7
meltdown,-1.0
milestone,0.7
miss,-0.8
missed,-0.8
misses,-0.8
momentum,0.6
opportunities,0.5
opportunity,0.5
optimism,0.6
optimistic,0.6
outage,-0.7
outperform,0.8
outperforms,0.8
overvalued,-0.5
partnership,0.5
penalty,-0.7
plummet,-0.9
plummeted,-0.9
plummets,-0.9
plunge,-0.9
plunged,-0.9
plunges,-0.9
positive,0.5
pressure,-0.5
probe,-0.7
profit,0.7
profitable,0.7
profits,0.7
rallies,0.8
rally,0.8
rebound,0.7
recall,-0.8
recession,-0.7
record,0.9
recovery,0.6
resilient,0.4
rise,0.6
rises,0.6
rising,0.6
risk,-0.5
risks,-0.5
risky,-0.5
robust,0.7
rose,0.6
saturated,-0.3
scandal,-0.9
selloff,-0.8
shortfall,-0.7
skyrocket,1.0
slowdown,-0.5
slowing,-0.5
sluggish,-0.3
slump,-0.8
slumps,-0.8
soar,1.0
soared,1.0
soars,1.0
solid,0.5
stable,0.4
stagnant,-0.3
steady,0.4
stellar,0.9
strong,0.7
success,0.6
successful,0.6
surge,1.0
surged,1.0
surges,1.0
suspend,-0.6
suspended,-0.6
tumble,-0.8
tumbled,-0.8
tumbles,-0.8
uncertain,-0.4
uncertainty,-0.4
underperform,-0.6
underperforms,-0.6
undervalued,0.5
upbeat,0.7
upgrade,0.8
upgraded,0.8
upside,0.6
volatile,-0.5
volatility,-0.5
warn,-0.6
warned,-0.6
warning,-0.6
warns,-0.6
weak,-0.7
weakness,-0.7
win,0.7
winner,0.7
wins,0.7
#negations
not
no
never
without
hardly
barely
neither
nor
cannot
)lex";

}  // namespace quantbench
