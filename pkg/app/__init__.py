"""
샌드위치 보 경계 피드백 안정화 실험실 - 메인 애플리케이션 패키지
"""
