#include <stdio.h>
#include <stdlib.h>
#include <string.h>

struct record {
  char name[16];
  int age;
  double score;
  short dept;
};

static struct record people[] = {
    {"alice", 34, 88.5, 2}, {"bob", 27, 92.25, 1},  {"carol", 45, 79.0, 3}, {"dave", 31, 85.75, 2},
    {"erin", 29, 95.5, 1},  {"frank", 52, 70.0, 3}, {"grace", 38, 91.0, 2}, {"heidi", 41, 66.5, 1},
};

static const char *dept_names[] = {"none", "research", "sales", "support"};

static int by_age(const void *a, const void *b) {
  return ((const struct record *)a)->age - ((const struct record *)b)->age;
}

static int by_score(const void *a, const void *b) {
  double x = ((const struct record *)a)->score, y = ((const struct record *)b)->score;
  return (x < y) - (x > y);
}

static int by_name(const void *a, const void *b) {
  return strcmp(((const struct record *)a)->name, ((const struct record *)b)->name);
}

static int (*orders[])(const void *, const void *) = {by_age, by_score, by_name};

int main(int argc, char **argv) {
  int which = argc > 1 ? atoi(argv[1]) % 3 : 0;
  size_t n = sizeof people / sizeof people[0];
  qsort(people, n, sizeof people[0], orders[which]);
  double sum[4] = {0};
  int cnt[4] = {0};
  for (size_t i = 0; i < n; ++i) {
    printf("%-6s %3d %6.2f %s\n", people[i].name, people[i].age, people[i].score, dept_names[people[i].dept]);
    sum[people[i].dept] += people[i].score;
    cnt[people[i].dept]++;
  }
  for (int d = 1; d < 4; ++d) printf("%s avg %.3f\n", dept_names[d], cnt[d] ? sum[d] / cnt[d] : 0.0);
  return 0;
}
