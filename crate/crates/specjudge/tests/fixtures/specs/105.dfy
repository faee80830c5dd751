function countTo(a: array<int>, n: int): int
  reads a
  requires 0 <= n <= a.Length
  decreases n
{ if n == 0 then 0 else countTo(a, n - 1) + (if a[n - 1] > 0 then 1 else 0) }

method countPositive(a: array<int>) returns (count: int)
  ensures count == countTo(a, a.Length)
