"""Bundled worked examples: three arithmetic word problems, each with its
generated logic program, a serialized reasoning tree, a natural-language
walkthrough of that tree, and the final answer.

These serve as default few-shot exemplars for the prompt builders and double
as golden fixtures for the engine and pipeline tests.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class WorkedExample:
    name: str
    question: str
    prolog: str
    tree: str
    translation: str
    answer: str
    task: str = "arithmetic"


_TINA_QUESTION = """\
sent-1: Tina makes $18.00 an hour.
sent-2: If she works more than 8 hours per shift,
sent-3: she is eligible for overtime,
sent-4: which is paid by your hourly wage + 1/2 your hourly wage.
sent-5: If she works 10 hours every day for 5 days,
sent-6: how much money does she make?"""

_TINA_PROLOG = """\
/* Context */

wage(18.00).

overtime_wage(W) :- 
    wage(W1), 
    W is 1.5 * W1.

regular_earning_for_day(E) :- 
    wage(W),
    E is 8 * W.

overtime_hours(H) :-
    H is 10 - 8.

overtime_earning_for_day(E) :- 
    overtime_hours(H),
    overtime_wage(W),
    E is H * W.

total_earning_for_day(Total) :-
    regular_earning_for_day(Regular),
    overtime_earning_for_day(Overtime),
    Total is Regular + Overtime.

total_earning_for_5_days(Total) :-
    total_earning_for_day(OneDay),
    Total is 5 * OneDay.

/* Query */
solve(Total) :- total_earning_for_5_days(Total)."""

_TINA_TREE = """\
=>(=>(,(=>(,(=>(,(=>(builtin(true), wage(18.0)), =>(builtin(is(144.0, *(8, 18.0))), is(144.0, *(8, 18.0)))), regular_earning_for_day(144.0)), ,(=>(,(=>(=>(builtin(is(2, -(10, 8))), is(2, -(10, 8))), overtime_hours(2)), ,(=>(builtin(,(g(wage(18.0)), g(is(27.0, *(1.5, 18.0))))), overtime_wage(27.0)), =>(builtin(is(54.0, *(2, 27.0))), is(54.0, *(2, 27.0))))), overtime_earning_for_day(54.0)), =>(builtin(is(198.0, +(144.0, 54.0))), is(198.0, +(144.0, 54.0))))), total_earning_for_day(198.0)), =>(builtin(is(990.0, *(5, 198.0))), is(990.0, *(5, 198.0)))), total_earning_for_5_days(990.0)), solve(990.0))"""

_TINA_TRANSLATION = """\
Tina earns $18.00 per hour according to the information provided. She has shifts where, if she works more than 8 hours, the additional hours are considered overtime. Overtime pay is calculated at one and a half times her regular hourly wage.

On a typical day, if Tina works 10 hours, this includes 2 hours of overtime since she exceeds the 8-hour regular work period. Her regular earnings for working 8 hours a day at $18.00 per hour amounts to $144.00 per day. For the 2 hours of overtime, since the overtime rate is $27.00 per hour (1.5 times her regular hourly wage), she earns $54.00 from overtime work per day.

Therefore, her total earnings for a single day, combining her regular and overtime earnings, are $198.00. Over the course of 5 days, working the same hours daily, Tina makes a total of $990.00, factoring in all regular pay and overtime across the five days."""

_JANICE_QUESTION = """\
sent-1: Janice can type 6 sentences per minute.
sent-2: Today at work, Janice continued working on a paper she started typing yesterday.
sent-3: She typed for 20 minutes, took a break,
sent-4: and typed 15 minutes longer.
sent-5: She then had to erase 40 sentences she had typed incorrectly.
sent-6: After a meeting, she typed for 18 minutes more.
sent-7: In all, the paper had 536 sentences by the end of today.
sent-8: How many sentences did she start with today?"""

_JANICE_PROLOG = """\
/* Context */

sentences_per_minute(6).
typing_sessions([20, 15, 18]).
erased_sentences(40).
total_end_sentences(536).

sentences_typed(SessionMinutes, Typed) :-
    sentences_per_minute(SPM),
    Typed is SPM * SessionMinutes.

total_sentences_typed_today(Total) :-
    typing_sessions(Sessions),
    maplist(sentences_typed, Sessions, TypedPerSession),
    sum_list(TypedPerSession, TotalTyped),
    erased_sentences(Erased),
    Total is TotalTyped - Erased.

start_sentences(TodayStart) :-
    total_end_sentences(EndToday),
    total_sentences_typed_today(TodayTyped),
    TodayStart is EndToday - TodayTyped.

/* Query */
solve(StartSentences) :- start_sentences(StartSentences)."""

_JANICE_TREE = """\
=>(=>(,(=>(builtin(true), total_end_sentences(536)), ,(=>(,(=>(builtin(true), typing_sessions([20, 15, 18])), builtin(,(g(maplist(sentences_typed, [20, 15, 18], [120, 90, 108])), ,(g(sum_list([120, 90, 108], 318)), ,(g(erased_sentences(40)), g(is(278, -(318, 40)))))))), total_sentences_typed_today(278)), =>(builtin(is(258, -(536, 278))), is(258, -(536, 278))))), start_sentences(258)), solve(258))"""

_JANICE_TRANSLATION = """\
Janice's typing speed is 6 sentences per minute. Today, she had three separate typing sessions: the first lasted for 20 minutes, the second for 15 minutes, and the third for 18 minutes. Over these sessions, she initially typed a total of 318 sentences. However, she made a mistake and had to erase 40 sentences, leaving her with 278 sentences typed effectively today. By the end of the day, the total number of sentences on her paper was 536. To find out how many sentences were on the paper at the beginning of the day, we subtract the sentences typed today (278) from the total at the end of the day (536). Hence, Janice started the day with 258 sentences already on her paper."""

_JESSE_QUESTION = """\
sent-1: Jesse and Mia are competing in a week long race.
sent-2: They have one week to run 30 miles.
sent-3: On the first three days Jesse averages (2/3) of a mile.
sent-4: On day four she runs 10 miles.
sent-5: Mia averages 3 miles a day over the first 4 days.
sent-6: What is the average of their average that they have to run over the final three days?"""

_JESSE_PROLOG = """\
/* Context */
total_distance(30).
jesse_first_three_days_avg(2/3).
jesse_day_four(10).
mia_first_four_days_avg(3).

jesse_first_four_days_total(Distance) :-
    jesse_first_three_days_avg(DayAvg),
    jesse_day_four(DayFour),
    Distance is 3 * DayAvg + DayFour.

mia_first_four_days_total(Distance) :-
    mia_first_four_days_avg(DayAvg),
    Distance is 4 * DayAvg.

remaining_avg(Person, Avg) :-
    (Person = jesse -> jesse_first_four_days_total(Distance);
    Person = mia -> mia_first_four_days_total(Distance)),
    total_distance(Total),
    Remaining is Total - Distance,
    Avg is Remaining / 3.

average_of_averages(Result) :-
    remaining_avg(jesse, JesseAvg),
    remaining_avg(mia, MiaAvg),
    Result is (JesseAvg + MiaAvg) / 2.

/* Query */
solve(Average) :- average_of_averages(Average)."""

_JESSE_TREE = """\
=>(=>(,(=>(,(=>(builtin(;(->(=(jesse, jesse), jesse_first_four_days_total(12.0)), ->(=(jesse, mia), mia_first_four_days_total(12.0)))), ;(->(=(jesse, jesse), jesse_first_four_days_total(12.0)), ->(=(jesse, mia), mia_first_four_days_total(12.0)))), ,(=>(true, total_distance(30)), ,(=>(builtin(is(18.0, -(30, 12.0))), is(18.0, -(30, 12.0))), =>(builtin(is(6.0, /(18.0, 3))), is(6.0, /(18.0, 3)))))), remaining_avg(jesse, 6.0)), ,(=>(,(=>(builtin(;(->(=(mia, jesse), jesse_first_four_days_total(12)), ->(=(mia, mia), mia_first_four_days_total(12)))), ;(->(=(mia, jesse), jesse_first_four_days_total(12)), ->(=(mia, mia), mia_first_four_days_total(12)))), ,(=>(builtin(true), total_distance(30)), builtin(,(g(is(18, -(30, 12))), g(is(6, /(18, 3))))))), remaining_avg(mia, 6)), =>(builtin(is(6.0, /(+(6.0, 6), 2))), is(6.0, /(+(6.0, 6), 2))))), average_of_averages(6.0)), solve(6.0))"""

_JESSE_TRANSLATION = """\
Jesse and Mia are competing in a week-long race where each needs to run a total of 30 miles. Jesse averages ( \\frac{2}{3} ) mile each day for the first three days, totaling 2 miles, and then runs 10 miles on the fourth day, making it a total of 12 miles in the first four days. Mia averages 3 miles per day over the first four days, totaling 12 miles as well.

Given that they both need to complete 30 miles by the end of the week, both Jesse and Mia have 18 miles left to run over the final three days after the first four days. This results in each needing to run an average of 6 miles per day over the last three days.

To find the average of their averages over these remaining three days, we calculate ( \\frac{(6+6)}{2} ), which remains 6 miles per day. Therefore, the average of their average daily miles over the final three days that they need to run is 6 miles."""

TINA = WorkedExample(
    name="tina-overtime",
    question=_TINA_QUESTION,
    prolog=_TINA_PROLOG,
    tree=_TINA_TREE,
    translation=_TINA_TRANSLATION,
    answer="990.0",
)

JANICE = WorkedExample(
    name="janice-typing",
    question=_JANICE_QUESTION,
    prolog=_JANICE_PROLOG,
    tree=_JANICE_TREE,
    translation=_JANICE_TRANSLATION,
    answer="258",
)

JESSE = WorkedExample(
    name="jesse-mia-race",
    question=_JESSE_QUESTION,
    prolog=_JESSE_PROLOG,
    tree=_JESSE_TREE,
    translation=_JESSE_TRANSLATION,
    answer="6.0",
)

DEFAULT_EXEMPLARS: tuple[WorkedExample, ...] = (TINA, JANICE, JESSE)
