"""
수치 커널 패키지 (유한요소 형상함수, 편각 원리)
"""
