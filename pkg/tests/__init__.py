"""测试套件"""
